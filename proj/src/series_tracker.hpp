#pragma once

#include <cmath>
#include <vector>

#include "ccinv/cc_sampler.hpp"
#include "ccinv/diagnostics.hpp"

namespace ccinv::detail {

/// Running mean, variance and error bar of one scalar sample series, shared by the
/// samplers. Correlated series use Geyer's ESS; independent ones use their length.
template <Scalar T>
class SeriesTracker {
 public:
  SeriesTracker(const StoppingRule& rule, bool independent)
      : re_(rule.max_lag), im_(rule.max_lag), keep_(rule.keep_series), iid_(independent) {}

  void push(const T& s) {
    re_.push(real_part(s));
    if constexpr (is_complex_v<T>) {
      im_.push(s.imag());
    }
    if (keep_) {
      series_.push_back(s);
    }
  }

  std::uint64_t count() const noexcept { return re_.count(); }

  T mean() const {
    if constexpr (is_complex_v<T>) {
      return T(re_.mean(), im_.mean());
    } else {
      return re_.mean();
    }
  }

  bool meets(const StoppingRule& rule) const {
    const Parts p = parts();
    const double se = std::sqrt(p.se_re * p.se_re + p.se_im * p.se_im);
    const double target = std::max(rule.relative_tolerance * std::abs(mean()), rule.absolute_tolerance);
    return se <= target;
  }

  void finalize(Estimate<T>& e) {
    const Parts p = parts();
    e.value = mean();
    e.mc_std_error_real = p.se_re;
    e.mc_std_error_imag = p.se_im;
    e.mc_std_error = std::sqrt(p.se_re * p.se_re + p.se_im * p.se_im);
    e.sample_variance = p.var_re + p.var_im;
    e.effective_length = p.ess_re;
    e.effective_length_imag = p.ess_im;
    e.series = std::move(series_);
  }

 private:
  struct Parts {
    double var_re = 0.0, var_im = 0.0;
    double ess_re = 0.0, ess_im = 0.0;
    double se_re = 0.0, se_im = 0.0;
  };

  Parts parts() const {
    Parts p;
    // For a 1-sample series no spread can be estimated.
    if (count() < 2) {
      p.ess_re = p.ess_im = static_cast<double>(count());
      return p;
    }
    p.var_re = re_.variance();
    p.ess_re = ess(re_, false);
    p.se_re = p.var_re > 0.0 ? std::sqrt(p.var_re / p.ess_re) : 0.0;
    if constexpr (is_complex_v<T>) {
      p.var_im = im_.variance();
      p.ess_im = ess(im_, true);
      p.se_im = p.var_im > 0.0 ? std::sqrt(p.var_im / p.ess_im) : 0.0;
    }
    return p;
  }

  double ess(const GeyerAccumulator& acc, bool imag) const {
    const auto n = static_cast<double>(acc.count());
    if (iid_ || acc.count() < kMinSeriesForEss) {
      return n;
    }
    const double fast = acc.effective_length();
    if (!acc.saturated() || !keep_) {
      return fast;
    }
    std::vector<double> part(series_.size());
    for (std::size_t i = 0; i < series_.size(); ++i) {
      part[i] = imag ? imag_part(series_[i]) : real_part(series_[i]);
    }
    return effective_length(part);
  }

  GeyerAccumulator re_;
  GeyerAccumulator im_;
  std::vector<T> series_;
  bool keep_;
  bool iid_;
};

}  // namespace ccinv::detail
