#include "ccinv/cc_sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ccinv/errors.hpp"
#include "series_tracker.hpp"

namespace ccinv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <Scalar T>
double max_norm(std::span<const T> v) {
  double m = 0.0;
  for (const auto& x : v) {
    const double a = std::abs(x);
    // NaN compares false; propagate it so callers see a non-finite norm.
    if (!(a <= m)) {
      m = a;
    }
  }
  return m;
}

template <Scalar T>
double max_gap(std::span<const T> a, std::span<const T> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (!(d <= m)) {
      m = d;
    }
  }
  return m;
}

/// Relative coupled gap; identical vectors give 0 even when both are zero.
template <Scalar T>
double relative_gap(std::span<const T> a, std::span<const T> b) {
  const double gap = max_gap(a, b);
  if (gap == 0.0) {
    return 0.0;
  }
  const double scale = std::max(max_norm(a), max_norm(b));
  return gap / scale;
}

bool diverged(double norm) { return !std::isfinite(norm) || norm > kDivergenceBound; }

template <Scalar T>
std::vector<T> start_or(const std::vector<T>& given, index_t n, bool ramp, const char* name) {
  if (given.empty()) {
    std::vector<T> v(static_cast<std::size_t>(n), T{});
    if (ramp) {
      for (index_t i = 0; i < n; ++i) {
        v[i] = T(static_cast<double>(i + 1));
      }
    }
    return v;
  }
  if (static_cast<index_t>(given.size()) != n) {
    throw InvalidArgument(std::string("burn-in start vector ") + name + " has length " +
                          std::to_string(given.size()) + ", expected " + std::to_string(n));
  }
  return given;
}

template <Scalar T>
void validate_config(const BurnInConfig<T>& cfg, const StoppingRule& stop) {
  if (!(cfg.tolerance > 0.0)) {
    throw InvalidArgument("burn-in tolerance must be positive");
  }
  if (stop.check_interval == 0) {
    throw InvalidArgument("stopping check interval must be positive");
  }
  if (!(stop.relative_tolerance >= 0.0) || !(stop.absolute_tolerance >= 0.0)) {
    throw InvalidArgument("stopping tolerances must be non-negative");
  }
}

NoiseSpec sized(NoiseSpec noise, index_t n) {
  noise.dimension = n;
  return noise;
}

/// Burn-in for the z chains only (used when w == z).
template <Scalar T>
BurnInResult<T> run_burn_in_gibbs(const CorrelatedChains<T>& chains, const NoiseSpec& noise,
                                  const BurnInConfig<T>& cfg) {
  const index_t n = chains.order();
  std::vector<T> za = start_or(cfg.z_start_a, n, false, "z_a");
  std::vector<T> zb = start_or(cfg.z_start_b, n, true, "z_b");
  std::vector<double> phi(static_cast<std::size_t>(n));
  BurnInResult<T> res;
  std::vector<double> growth;
  for (std::uint64_t k = 1; k <= cfg.max_cycles; ++k) {
    draw(noise, k, phi);
    chains.sweep_z(za, phi);
    chains.sweep_z(zb, phi);
    const double norm = std::max(max_norm<T>(za), max_norm<T>(zb));
    growth.push_back(norm);
    if (diverged(norm)) {
      throw DivergenceError("gibbs chains diverged at burn-in cycle " + std::to_string(k) +
                                " (sp(T) >= 1?)",
                            k, std::move(growth));
    }
    const double gz = relative_gap<T>(za, zb);
    res.z_gap.push_back(gz);
    res.w_gap.push_back(gz);
    if (gz < cfg.tolerance) {
      res.cycles = k;
      res.state.w = za;
      res.state.z = std::move(za);
      res.state.cycle = k;
      return res;
    }
  }
  throw DivergenceError("burn-in did not couple within " + std::to_string(cfg.max_cycles) +
                            " cycles",
                        cfg.max_cycles, std::move(growth));
}

template <Scalar T>
Estimate<T> trace_impl(const SparseMatrix<T>& c, const TraceQuery& q, const NoiseSpec& noise_in,
                       const BurnInConfig<T>& cfg, const StoppingRule& stop, bool gibbs) {
  validate_config(cfg, stop);
  q.validate(c.order());
  const CorrelatedChains<T> chains(c);
  const NoiseSpec noise = sized(noise_in, c.order());

  Estimate<T> est;
  const auto t0 = Clock::now();
  BurnInResult<T> burn =
      gibbs ? run_burn_in_gibbs(chains, noise, cfg) : run_burn_in(c, noise, cfg);
  est.burn_in_seconds = seconds_since(t0);
  est.burn_in_cycles = burn.cycles;

  std::vector<T> z = std::move(burn.state.z);
  std::vector<T> w = std::move(burn.state.w);
  std::vector<double> phi(z.size());
  detail::SeriesTracker<T> tracker(stop, false);
  std::vector<double> growth;

  const auto t1 = Clock::now();
  std::uint64_t k = burn.cycles;
  for (std::uint64_t m = 1; m <= stop.max_cycles; ++m) {
    ++k;
    draw(noise, k, phi);
    chains.sweep_z(z, phi);
    if (!gibbs) {
      chains.sweep_w(w, phi);
    }
    const std::span<const T> wv = gibbs ? std::span<const T>(z) : std::span<const T>(w);
    const T s = q.form<T>(wv, z);
    if (!is_finite_value(s) || diverged(std::abs(s))) {
      growth.push_back(std::abs(s));
      throw DivergenceError("non-finite or divergent sample at cycle " + std::to_string(k), k,
                            std::move(growth));
    }
    if (m % stop.check_interval == 0) {
      const double norm = std::max(max_norm<T>(z), max_norm<T>(wv));
      growth.push_back(norm);
      if (diverged(norm)) {
        throw DivergenceError("chains diverged at cycle " + std::to_string(k), k,
                              std::move(growth));
      }
    }
    tracker.push(s);
    if (m % stop.check_interval == 0 && m >= stop.min_samples && tracker.meets(stop)) {
      est.converged = true;
      break;
    }
  }
  est.sampling_seconds = seconds_since(t1);
  est.total_cycles = k;
  tracker.finalize(est);
  return est;
}

}  // namespace

template <Scalar T>
CorrelatedChains<T>::CorrelatedChains(const SparseMatrix<T>& c) : c_(&c) {
  const auto n = static_cast<std::size_t>(c.order());
  inv_diag_.resize(n);
  noise_scale_.resize(n);
  inv_conj_diag_.resize(n);
  noise_scale_conj_.resize(n);
  const auto& d = c.diagonal();
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] == T{}) {
      throw ZeroDiagonalError(static_cast<index_t>(i));
    }
    if constexpr (!is_complex_v<T>) {
      if (d[i] < 0.0) {
        throw NegativeDiagonalError(static_cast<index_t>(i));
      }
    }
    const T root = std::sqrt(d[i]);
    inv_diag_[i] = T(1.0) / d[i];
    noise_scale_[i] = T(1.0) / root;
    inv_conj_diag_[i] = conj_value(inv_diag_[i]);
    noise_scale_conj_[i] = conj_value(noise_scale_[i]);
  }
  auto strip = [n](auto columns_of, auto values_of, bool conjugate, OffDiagonal& out) {
    out.ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto cols = columns_of(static_cast<index_t>(i));
      const auto vals = values_of(static_cast<index_t>(i));
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] != static_cast<index_t>(i)) {
          out.idx.push_back(cols[k]);
          out.val.push_back(conjugate ? conj_value(vals[k]) : vals[k]);
        }
      }
      out.ptr[i + 1] = static_cast<index_t>(out.idx.size());
    }
  };
  strip([&](index_t i) { return c.row_columns(i); }, [&](index_t i) { return c.row_values(i); },
        false, rows_);
  strip([&](index_t i) { return c.column_rows(i); },
        [&](index_t i) { return c.column_values(i); }, true, adjoint_rows_);
}

template <Scalar T>
void CorrelatedChains<T>::sweep_z(std::span<T> z, std::span<const double> phi) const {
  const index_t* ptr = rows_.ptr.data();
  const index_t* idx = rows_.idx.data();
  const T* val = rows_.val.data();
  const index_t n = c_->order();
  for (index_t i = 0; i < n; ++i) {
    T sum{};
    for (index_t k = ptr[i]; k < ptr[i + 1]; ++k) {
      sum += val[k] * z[idx[k]];
    }
    z[i] = phi[i] * noise_scale_[i] - inv_diag_[i] * sum;
  }
}

template <Scalar T>
void CorrelatedChains<T>::sweep_w(std::span<T> w, std::span<const double> phi) const {
  const index_t* ptr = adjoint_rows_.ptr.data();
  const index_t* idx = adjoint_rows_.idx.data();
  const T* val = adjoint_rows_.val.data();
  const index_t n = c_->order();
  for (index_t i = 0; i < n; ++i) {
    T sum{};
    for (index_t k = ptr[i]; k < ptr[i + 1]; ++k) {
      sum += val[k] * w[idx[k]];
    }
    w[i] = phi[i] * noise_scale_conj_[i] - inv_conj_diag_[i] * sum;
  }
}

template <Scalar T>
void sweep_z(const SparseMatrix<T>& c, std::span<T> z, std::span<const double> phi) {
  if (static_cast<index_t>(z.size()) != c.order() || z.size() != phi.size()) {
    throw InvalidArgument("sweep_z: vector lengths do not match the matrix order");
  }
  CorrelatedChains<T>(c).sweep_z(z, phi);
}

template <Scalar T>
void sweep_w(const SparseMatrix<T>& c, std::span<T> w, std::span<const double> phi) {
  if (static_cast<index_t>(w.size()) != c.order() || w.size() != phi.size()) {
    throw InvalidArgument("sweep_w: vector lengths do not match the matrix order");
  }
  CorrelatedChains<T>(c).sweep_w(w, phi);
}

template <Scalar T>
BurnInResult<T> run_burn_in(const SparseMatrix<T>& c, const NoiseSpec& noise_in,
                            const BurnInConfig<T>& cfg) {
  if (!(cfg.tolerance > 0.0)) {
    throw InvalidArgument("burn-in tolerance must be positive");
  }
  const CorrelatedChains<T> chains(c);
  const NoiseSpec noise = sized(noise_in, c.order());
  const index_t n = c.order();

  std::vector<T> za = start_or(cfg.z_start_a, n, false, "z_a");
  std::vector<T> zb = start_or(cfg.z_start_b, n, true, "z_b");
  std::vector<T> wa = start_or(cfg.w_start_a, n, false, "w_a");
  std::vector<T> wb = start_or(cfg.w_start_b, n, true, "w_b");
  std::vector<double> phi(static_cast<std::size_t>(n));

  BurnInResult<T> res;
  std::vector<double> growth;
  for (std::uint64_t k = 1; k <= cfg.max_cycles; ++k) {
    draw(noise, k, phi);
    chains.sweep_z(za, phi);
    chains.sweep_z(zb, phi);
    chains.sweep_w(wa, phi);
    chains.sweep_w(wb, phi);

    const double norm = std::max({max_norm<T>(za), max_norm<T>(zb), max_norm<T>(wa),
                                  max_norm<T>(wb)});
    growth.push_back(norm);
    if (diverged(norm)) {
      throw DivergenceError("chains diverged at burn-in cycle " + std::to_string(k) +
                                " (sp(T) >= 1 or sp(S) >= 1?)",
                            k, std::move(growth));
    }
    const double gz = relative_gap<T>(za, zb);
    const double gw = relative_gap<T>(wa, wb);
    res.z_gap.push_back(gz);
    res.w_gap.push_back(gw);
    if (gz < cfg.tolerance && gw < cfg.tolerance) {
      res.cycles = k;
      res.state.z = std::move(za);
      res.state.w = std::move(wa);
      res.state.cycle = k;
      return res;
    }
  }
  throw DivergenceError("burn-in did not couple within " + std::to_string(cfg.max_cycles) +
                            " cycles",
                        cfg.max_cycles, std::move(growth));
}

template <Scalar T>
Estimate<T> estimate_trace(const SparseMatrix<T>& c, const TraceQuery& q, const NoiseSpec& noise,
                           const BurnInConfig<T>& cfg, const StoppingRule& stop) {
  return trace_impl(c, q, noise, cfg, stop, false);
}

template <Scalar T>
Estimate<T> estimate_trace_gibbs(const SparseMatrix<T>& c, const TraceQuery& q,
                                 const NoiseSpec& noise, const BurnInConfig<T>& cfg,
                                 const StoppingRule& stop) {
  if (!c.is_hermitian()) {
    throw InvalidArgument("the Gibbs sampler requires a hermitian matrix; use the correlated "
                          "chains sampler");
  }
  return trace_impl(c, q, noise, cfg, stop, true);
}

template <Scalar T>
EntryEstimates<T> estimate_inverse_elements(const SparseMatrix<T>& c, const EntryList& entries,
                                            const NoiseSpec& noise_in, const BurnInConfig<T>& cfg,
                                            const StoppingRule& stop) {
  if (entries.empty()) {
    throw InvalidArgument("estimate_inverse_elements: entry list is empty");
  }
  for (const auto& [i, j] : entries) {
    if (i < 0 || i >= c.order() || j < 0 || j >= c.order()) {
      throw InvalidArgument("requested entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside the matrix");
    }
  }
  validate_config(cfg, stop);
  const CorrelatedChains<T> chains(c);
  const NoiseSpec noise = sized(noise_in, c.order());

  const auto t0 = Clock::now();
  BurnInResult<T> burn = run_burn_in(c, noise, cfg);
  const double burn_seconds = seconds_since(t0);

  EntryList unique = entries;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<detail::SeriesTracker<T>> trackers(unique.size(),
                                                 detail::SeriesTracker<T>(stop, false));

  std::vector<T> z = std::move(burn.state.z);
  std::vector<T> w = std::move(burn.state.w);
  std::vector<double> phi(z.size());
  std::vector<double> growth;
  bool converged = false;
  const auto t1 = Clock::now();
  std::uint64_t k = burn.cycles;
  for (std::uint64_t m = 1; m <= stop.max_cycles; ++m) {
    ++k;
    draw(noise, k, phi);
    chains.sweep_z(z, phi);
    chains.sweep_w(w, phi);
    const double norm = std::max(max_norm<T>(z), max_norm<T>(w));
    if (diverged(norm)) {
      growth.push_back(norm);
      throw DivergenceError("chains diverged at cycle " + std::to_string(k), k, std::move(growth));
    }
    for (std::size_t e = 0; e < unique.size(); ++e) {
      trackers[e].push(z[unique[e].first] * conj_value(w[unique[e].second]));
    }
    if (m % stop.check_interval == 0 && m >= stop.min_samples &&
        std::all_of(trackers.begin(), trackers.end(),
                    [&](const auto& t) { return t.meets(stop); })) {
      converged = true;
      break;
    }
  }
  const double sample_seconds = seconds_since(t1);

  EntryEstimates<T> out;
  for (std::size_t e = 0; e < unique.size(); ++e) {
    Estimate<T> est;
    est.burn_in_cycles = burn.cycles;
    est.total_cycles = k;
    est.converged = converged;
    est.burn_in_seconds = burn_seconds;
    est.sampling_seconds = sample_seconds;
    trackers[e].finalize(est);
    out.emplace(unique[e], std::move(est));
  }
  return out;
}

#define CCINV_INSTANTIATE(T)                                                                     \
  template class CorrelatedChains<T>;                                                            \
  template void sweep_z<T>(const SparseMatrix<T>&, std::span<T>, std::span<const double>);       \
  template void sweep_w<T>(const SparseMatrix<T>&, std::span<T>, std::span<const double>);       \
  template BurnInResult<T> run_burn_in<T>(const SparseMatrix<T>&, const NoiseSpec&,              \
                                          const BurnInConfig<T>&);                               \
  template Estimate<T> estimate_trace<T>(const SparseMatrix<T>&, const TraceQuery&,              \
                                         const NoiseSpec&, const BurnInConfig<T>&,               \
                                         const StoppingRule&);                                   \
  template Estimate<T> estimate_trace_gibbs<T>(const SparseMatrix<T>&, const TraceQuery&,        \
                                               const NoiseSpec&, const BurnInConfig<T>&,         \
                                               const StoppingRule&);                             \
  template EntryEstimates<T> estimate_inverse_elements<T>(const SparseMatrix<T>&,                \
                                                          const EntryList&, const NoiseSpec&,    \
                                                          const BurnInConfig<T>&,                \
                                                          const StoppingRule&);

CCINV_INSTANTIATE(double)
CCINV_INSTANTIATE(cdouble)

#undef CCINV_INSTANTIATE

}  // namespace ccinv
