#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ccinv/sparse_matrix.hpp"
#include "ccinv/trace_query.hpp"

namespace ccinv {

template <Scalar T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// Largest order the dense oracles accept.
inline constexpr index_t kDenseOracleCap = 4096;

template <Scalar T>
struct SolveReport {
  std::vector<T> x;
  int iterations = 0;
  /// The norm that satisfied (or last failed) the stopping test, already scaled.
  double stop_norm = 0.0;
  /// Max-norm of the last successive-iterate change.
  double change_norm = 0.0;
  /// Max-norm of b - Cx at exit.
  double residual_norm = 0.0;
  bool converged = false;
};

/// One forward Gauss-Seidel sweep on C x = b, in place: (D + L) x_new = b - U x_old.
/// Throws ZeroDiagonalError if any c_ii == 0.
template <Scalar T>
void gauss_seidel_sweep(const SparseMatrix<T>& c, std::span<const T> b, std::span<T> x);

/// One forward sweep on C^dagger x = b, reading adjoint rows.
template <Scalar T>
void gauss_seidel_adjoint_sweep(const SparseMatrix<T>& c, std::span<const T> b, std::span<T> x);

/// Forward-sweep Gauss-Seidel. Stops when the max-norm of the successive change is at
/// most tol * max(1, |x|_max). Reaching max_iter leaves converged == false.
template <Scalar T>
SolveReport<T> gauss_seidel(const SparseMatrix<T>& c, std::span<const T> b, std::span<const T> x0,
                            double tol, int max_iter);

/// Unpreconditioned bi-conjugate gradient, dual recurrence with C^dagger and shadow
/// residual r~0 = r0. Stops when either the successive change (as gauss_seidel) or the
/// residual max-norm relative to |b|_max drops to tol. Throws BreakdownError when a
/// recurrence inner product vanishes before convergence.
template <Scalar T>
SolveReport<T> bicg(const SparseMatrix<T>& c, std::span<const T> b, std::span<const T> x0,
                    double tol, int max_iter);

template <Scalar T>
DenseMatrix<T> to_dense(const SparseMatrix<T>& c);

/// Full inverse by partially pivoted LU. Order capped at kDenseOracleCap.
template <Scalar T>
DenseMatrix<T> dense_lu_inverse(const SparseMatrix<T>& c);

/// tr(Q C^-1) given a dense C^-1.
template <Scalar T>
T dense_trace(const TraceQuery& q, const DenseMatrix<T>& inverse);

enum class IterationOperator {
  /// T = (D + L)^-1 U, governs the z chains.
  lower_sweep,
  /// S^dagger = (D^dagger + U^dagger)^-1 L^dagger, same spectrum as S = L (D + U)^-1.
  adjoint_sweep,
};

struct SpectralEstimate {
  double radius = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Power-iteration estimate of sp(T) or sp(S), applied through triangular sweeps
/// without forming the operator. If successive growth ratios never settle (complex or
/// defective dominant spectrum) the result is a geometric-mean growth over the second
/// half of the run with converged == false.
template <Scalar T>
SpectralEstimate spectral_radius_estimate(const SparseMatrix<T>& c, IterationOperator op,
                                          double tol = 1e-6, int max_iter = 1000);

}  // namespace ccinv
