#pragma once

#include "ccinv/cc_sampler.hpp"

namespace ccinv {

enum class InnerSolver { bicg, gauss_seidel };

std::string to_string(InnerSolver s);
/// Accepts "bicg" or "gs".
InnerSolver parse_inner_solver(const std::string& name);

struct SeConfig {
  InnerSolver inner = InnerSolver::bicg;
  /// Relative successive-change tolerance of each inner solve.
  double inner_tolerance = 5e-5;
  int inner_max_iterations = 100000;
  StoppingRule stop;
  /// Systems are solved in order s = 1, 2, ... with noise key s.
};

/// tr(Q C^-1) from independent systems C v = phi, samples phi^dagger Q v. The error
/// bar uses the plain sample count (no autocorrelation). total_rounds sums the inner
/// iterations; sampling_cycles() is the number of systems. Throws ConvergenceError when
/// an inner solve hits its iteration cap.
template <Scalar T>
Estimate<T> se_estimate_trace(const SparseMatrix<T>& c, const TraceQuery& q,
                              const NoiseSpec& noise, const SeConfig& cfg);

/// Elements (C^-1)_ij from the samples v_i phi_j.
template <Scalar T>
EntryEstimates<T> se_estimate_inverse_elements(const SparseMatrix<T>& c, const EntryList& entries,
                                               const NoiseSpec& noise, const SeConfig& cfg);

}  // namespace ccinv
