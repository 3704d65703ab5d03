#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "ccinv/noise.hpp"
#include "ccinv/sparse_matrix.hpp"
#include "ccinv/trace_query.hpp"

namespace ccinv {

/// Coupled vectors z and w after `cycle` sweeps.
template <Scalar T>
struct ChainState {
  std::vector<T> z;
  std::vector<T> w;
  std::uint64_t cycle = 0;
};

/// Coupling burn-in. Empty start vectors take the defaults z = w = 0 for the first
/// pair and z = w = (1, 2, ..., n) for the second.
template <Scalar T>
struct BurnInConfig {
  double tolerance = 5e-5;
  std::uint64_t max_cycles = 100000;
  std::vector<T> z_start_a;
  std::vector<T> z_start_b;
  std::vector<T> w_start_a;
  std::vector<T> w_start_b;
};

template <Scalar T>
struct BurnInResult {
  /// First cycle N at which both coupled gaps were below tolerance.
  std::uint64_t cycles = 0;
  /// The surviving pair (z_a, w_a) at cycle N.
  ChainState<T> state;
  /// Per-cycle relative gap max|z_b - z_a| / max(|z_a|, |z_b|); likewise for w.
  std::vector<double> z_gap;
  std::vector<double> w_gap;
};

/// When sampling stops. A series is done once its Monte Carlo standard error is at most
/// max(relative_tolerance * |estimate|, absolute_tolerance); checked every
/// check_interval post-burn-in cycles. max_cycles caps the post-burn-in cycles, after
/// which the estimate is returned with converged == false.
struct StoppingRule {
  double relative_tolerance = 5e-5;
  double absolute_tolerance = 0.0;
  std::uint64_t check_interval = 100;
  std::uint64_t min_samples = 100;
  std::uint64_t max_cycles = 50'000'000;
  std::size_t max_lag = 512;
  bool keep_series = true;
};

/// Sampled estimate of a scalar functional of C^-1 with its Monte Carlo error.
///
/// For complex estimates the real and imaginary series are treated separately:
/// effective_length is the real part's, sample_variance the sum of both parts'
/// variances and mc_std_error their root-sum-square.
template <Scalar T>
struct Estimate {
  T value{};
  double mc_std_error = 0.0;
  double mc_std_error_real = 0.0;
  double mc_std_error_imag = 0.0;
  double sample_variance = 0.0;
  double effective_length = 0.0;
  double effective_length_imag = 0.0;
  std::vector<T> series;
  /// N, the discarded burn-in cycles (0 for independent samplers).
  std::uint64_t burn_in_cycles = 0;
  /// M, all cycles including burn-in.
  std::uint64_t total_cycles = 0;
  bool converged = false;
  /// Inner solver iterations summed over all samples (stochastic estimation only).
  std::uint64_t total_rounds = 0;
  double burn_in_seconds = 0.0;
  double sampling_seconds = 0.0;

  std::uint64_t sampling_cycles() const noexcept { return total_cycles - burn_in_cycles; }
};

template <Scalar T>
using CcEstimate = Estimate<T>;

using EntryList = std::vector<std::pair<index_t, index_t>>;

template <Scalar T>
using EntryEstimates = std::map<std::pair<index_t, index_t>, Estimate<T>>;

/// Iterates with max-norm above this, or non-finite, abort a run as divergent.
inline constexpr double kDivergenceBound = 1e12;

/// Precomputed per-row factors of the two sweeps.
///
/// z_i = phi_i / sqrt(c_ii) - (1 / c_ii) * sum_{j != i} c_ij z_j
/// w_i = phi_i / conj(sqrt(c_ii)) - (1 / conj(c_ii)) * sum_{j != i} conj(c_ji) w_j
///
/// sqrt is the principal branch. Using conj(sqrt(c_ii)) in the w sweep makes
/// E(z w^dagger) pick up exactly D between the triangular factors, including on the
/// negative real axis.
template <Scalar T>
class CorrelatedChains {
 public:
  /// Throws ZeroDiagonalError, or NegativeDiagonalError for real T with c_ii < 0.
  explicit CorrelatedChains(const SparseMatrix<T>& c);

  const SparseMatrix<T>& matrix() const noexcept { return *c_; }
  index_t order() const noexcept { return c_->order(); }

  void sweep_z(std::span<T> z, std::span<const double> phi) const;
  void sweep_w(std::span<T> w, std::span<const double> phi) const;

 private:
  /// Off-diagonal pattern per row restricted to j != i, as (start, column, value)
  /// arrays; the adjoint copy holds conj(c_ji) over column i of C.
  struct OffDiagonal {
    std::vector<index_t> ptr;
    std::vector<index_t> idx;
    std::vector<T> val;
  };

  const SparseMatrix<T>* c_;
  OffDiagonal rows_;
  OffDiagonal adjoint_rows_;
  std::vector<T> inv_diag_;
  std::vector<T> noise_scale_;
  std::vector<T> inv_conj_diag_;
  std::vector<T> noise_scale_conj_;
};

/// One in-place z sweep in increasing i (Gauss-Seidel ordering).
template <Scalar T>
void sweep_z(const SparseMatrix<T>& c, std::span<T> z, std::span<const double> phi);

/// One in-place w sweep over the adjoint rows of C.
template <Scalar T>
void sweep_w(const SparseMatrix<T>& c, std::span<T> w, std::span<const double> phi);

/// Runs the four coupled chains z_a, z_b, w_a, w_b on shared noise Phi^(k), k = 1, 2, ...
/// until both relative gaps drop below cfg.tolerance. Throws DivergenceError when an
/// iterate leaves kDivergenceBound or cfg.max_cycles pass without coupling.
template <Scalar T>
BurnInResult<T> run_burn_in(const SparseMatrix<T>& c, const NoiseSpec& noise,
                            const BurnInConfig<T>& cfg);

/// tr(Q C^-1) from the samples w^(k)dagger Q z^(k) of the surviving chain pair, which
/// continues on Phi^(k) for k > N.
template <Scalar T>
Estimate<T> estimate_trace(const SparseMatrix<T>& c, const TraceQuery& q, const NoiseSpec& noise,
                           const BurnInConfig<T>& cfg, const StoppingRule& stop);

/// Elements (C^-1)_ij from the samples z_i conj(w_j); sampling continues until every
/// requested entry meets the stopping rule.
template <Scalar T>
EntryEstimates<T> estimate_inverse_elements(const SparseMatrix<T>& c, const EntryList& entries,
                                            const NoiseSpec& noise, const BurnInConfig<T>& cfg,
                                            const StoppingRule& stop);

/// Single-chain Gibbs sampler for hermitian C (the w sweep is skipped since w == z):
/// tr(Q C^-1) from z^dagger Q z. Throws InvalidArgument for a non-hermitian C.
template <Scalar T>
Estimate<T> estimate_trace_gibbs(const SparseMatrix<T>& c, const TraceQuery& q,
                                 const NoiseSpec& noise, const BurnInConfig<T>& cfg,
                                 const StoppingRule& stop);

}  // namespace ccinv
