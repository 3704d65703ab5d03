#include "ccinv/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "ccinv/errors.hpp"

namespace ccinv {

namespace {

double clamp_ess(double ess, double n) {
  if (!(ess > 0.0) || ess > 1.5 * n) {
    return 1.5 * n;
  }
  return ess;
}

/// Geyer's initial positive sequence over an autocovariance function gamma(t).
/// Returns {ess, ran_out_of_lags}.
template <typename Gamma>
std::pair<double, bool> geyer(double n, std::size_t available_lags, Gamma gamma) {
  const double g0 = gamma(0);
  if (g0 <= 0.0) {
    return {n, false};
  }
  double pair_sum = 0.0;
  bool ran_out = true;
  for (std::size_t m = 0; 2 * m + 1 <= available_lags; ++m) {
    const double pair = gamma(2 * m) + gamma(2 * m + 1);
    if (pair <= 0.0) {
      ran_out = false;
      break;
    }
    pair_sum += pair;
  }
  const double sigma2 = -g0 + 2.0 * pair_sum;
  return {clamp_ess(n * g0 / sigma2, n), ran_out};
}

}  // namespace

double effective_length(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < kMinSeriesForEss) {
    throw InsufficientSamples("effective_length needs at least " +
                              std::to_string(kMinSeriesForEss) + " samples, got " +
                              std::to_string(n));
  }
  double mean = 0.0;
  for (double v : series) {
    mean += v;
  }
  mean /= static_cast<double>(n);
  auto gamma = [&](std::size_t t) {
    double s = 0.0;
    for (std::size_t k = 0; k + t < n; ++k) {
      s += (series[k] - mean) * (series[k + t] - mean);
    }
    return s / static_cast<double>(n);
  };
  return geyer(static_cast<double>(n), n - 1, gamma).first;
}

double sample_variance(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) {
    throw InsufficientSamples("sample variance needs at least 2 samples");
  }
  double mean = 0.0;
  for (double v : series) {
    mean += v;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : series) {
    ss += (v - mean) * (v - mean);
  }
  return ss / static_cast<double>(n - 1);
}

double mc_std_error(std::span<const double> series) {
  const double var = sample_variance(series);
  if (var == 0.0) {
    return 0.0;
  }
  return std::sqrt(var / effective_length(series));
}

double mc_std_error(std::span<const cdouble> series) {
  std::vector<double> re(series.size());
  std::vector<double> im(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    re[i] = series[i].real();
    im[i] = series[i].imag();
  }
  const double a = mc_std_error(re);
  const double b = mc_std_error(im);
  return std::sqrt(a * a + b * b);
}

double empirical_std_error(std::span<const double> estimates) {
  if (estimates.size() < 2) {
    throw InsufficientSamples("empirical standard error needs at least 2 replicates");
  }
  return std::sqrt(sample_variance(estimates));
}

double empirical_std_error(std::span<const cdouble> estimates) {
  if (estimates.size() < 2) {
    throw InsufficientSamples("empirical standard error needs at least 2 replicates");
  }
  std::vector<double> re(estimates.size());
  std::vector<double> im(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    re[i] = estimates[i].real();
    im[i] = estimates[i].imag();
  }
  return std::sqrt(sample_variance(re) + sample_variance(im));
}

GeyerAccumulator::GeyerAccumulator(std::size_t max_lag)
    : max_lag_(std::max<std::size_t>(max_lag, 2)),
      lag_products_(max_lag_ + 1, 0.0),
      ring_(max_lag_, 0.0) {
  head_.reserve(max_lag_);
}

void GeyerAccumulator::push(double value) {
  if (n_ == 0) {
    shift_ = value;
  }
  const double y = value - shift_;
  const std::size_t lags = std::min(n_, max_lag_);
  // ring_[(n - t) % L] holds y_{n-t}.
  for (std::size_t t = 1; t <= lags; ++t) {
    lag_products_[t] += y * ring_[(n_ - t) % max_lag_];
  }
  lag_products_[0] += y * y;
  sum_ += y;
  if (head_.size() < max_lag_) {
    head_.push_back(y);
  }
  ring_[n_ % max_lag_] = y;
  ++n_;
}

double GeyerAccumulator::mean() const {
  return n_ == 0 ? 0.0 : shift_ + sum_ / static_cast<double>(n_);
}

double GeyerAccumulator::variance() const {
  if (n_ < 2) {
    throw InsufficientSamples("sample variance needs at least 2 samples");
  }
  const double n = static_cast<double>(n_);
  const double ybar = sum_ / n;
  return std::max(0.0, (lag_products_[0] - n * ybar * ybar) / (n - 1.0));
}

double GeyerAccumulator::autocovariance_sum(std::size_t t, double last, double first) const {
  // sum_{k=0}^{n-t-1} (y_k - ybar)(y_{k+t} - ybar)
  //   = S_t - ybar (A_t + B_t) + (n - t) ybar^2, with A_t the sum of all but the last t
  //   values (last = their sum) and B_t the sum of all but the first t (first).
  const double n = static_cast<double>(n_);
  const double ybar = sum_ / n;
  const double a = sum_ - last;
  const double b = sum_ - first;
  return lag_products_[t] - ybar * (a + b) + (n - static_cast<double>(t)) * ybar * ybar;
}

double GeyerAccumulator::effective_length() const {
  if (n_ < kMinSeriesForEss) {
    throw InsufficientSamples("effective_length needs at least " +
                              std::to_string(kMinSeriesForEss) + " samples, got " +
                              std::to_string(n_));
  }
  const double n = static_cast<double>(n_);
  const std::size_t lags = std::min(n_ - 1, max_lag_);
  // Geyer walks lags in ascending order, so the edge sums are extended incrementally.
  std::vector<double> last(1, 0.0);
  std::vector<double> first(1, 0.0);
  auto gamma = [&](std::size_t t) {
    while (last.size() <= t) {
      const std::size_t j = last.size();
      last.push_back(last.back() + ring_[(n_ - j) % max_lag_]);
      first.push_back(first.back() + head_[j - 1]);
    }
    return autocovariance_sum(t, last[t], first[t]) / n;
  };
  auto [ess, ran_out] = geyer(n, lags, gamma);
  saturated_ = ran_out && lags < n_ - 1;
  return ess;
}

double GeyerAccumulator::mc_std_error() const {
  const double var = variance();
  if (var == 0.0) {
    return 0.0;
  }
  return std::sqrt(var / effective_length());
}

}  // namespace ccinv
