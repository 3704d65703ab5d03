#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccinv/types.hpp"

namespace ccinv {

/// Shortest series effective_length accepts.
inline constexpr std::size_t kMinSeriesForEss = 10;

/// Effective sample size of a serially correlated series by Geyer's initial positive
/// sequence: autocovariance lag pairs gamma(2m) + gamma(2m+1) are summed while positive,
/// ESS = n * gamma(0) / (-gamma(0) + 2 * sum). Clamped to (0, 1.5 n]; anti-correlated
/// series legitimately exceed n. A constant series returns n.
double effective_length(std::span<const double> series);

/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> series);

/// sqrt(sample_variance / effective_length). Complex series: real and imaginary parts
/// separately, combined as root-sum-square.
double mc_std_error(std::span<const double> series);
double mc_std_error(std::span<const cdouble> series);

/// Sample standard deviation of independent replicate estimates (at least two).
double empirical_std_error(std::span<const double> estimates);
double empirical_std_error(std::span<const cdouble> estimates);

/// Streaming autocovariances up to a fixed lag, so Geyer's estimate can be refreshed
/// during a run in O(max_lag) instead of rescanning the whole series.
///
/// Values are shifted by the first sample before accumulating to limit cancellation
/// when the mean is large compared with the spread.
class GeyerAccumulator {
 public:
  explicit GeyerAccumulator(std::size_t max_lag = 512);

  void push(double value);

  std::size_t count() const noexcept { return n_; }
  double mean() const;
  double variance() const;

  /// Geyer ESS from the streamed autocovariances; see effective_length().
  double effective_length() const;
  double mc_std_error() const;

  /// True when the last effective_length() call ran out of lags before the pair
  /// sequence turned non-positive; the caller should recompute from the full series.
  bool saturated() const noexcept { return saturated_; }

 private:
  double autocovariance_sum(std::size_t lag, double last, double first) const;

  std::size_t max_lag_;
  std::size_t n_ = 0;
  double shift_ = 0.0;
  double sum_ = 0.0;
  std::vector<double> lag_products_;  // sum_k y_k y_{k+t}, t = 0..max_lag
  std::vector<double> head_;          // first max_lag shifted values
  std::vector<double> ring_;          // last max_lag shifted values
  mutable bool saturated_ = false;
};

}  // namespace ccinv
