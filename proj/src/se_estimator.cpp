#include "ccinv/se_estimator.hpp"

#include <algorithm>
#include <chrono>

#include "ccinv/errors.hpp"
#include "ccinv/iter_solvers.hpp"
#include "series_tracker.hpp"

namespace ccinv {

namespace {

using Clock = std::chrono::steady_clock;

void validate(const SeConfig& cfg) {
  if (!(cfg.inner_tolerance > 0.0)) {
    throw InvalidArgument("inner tolerance must be positive");
  }
  if (cfg.inner_max_iterations < 1) {
    throw InvalidArgument("inner iteration cap must be at least 1");
  }
  if (cfg.stop.check_interval == 0) {
    throw InvalidArgument("stopping check interval must be positive");
  }
  if (!(cfg.stop.relative_tolerance >= 0.0) || !(cfg.stop.absolute_tolerance >= 0.0)) {
    throw InvalidArgument("stopping tolerances must be non-negative");
  }
}

/// Solves C v = phi^(s) for s = 1, 2, ... and hands (v, phi) to `consume` until it
/// returns true or the cap is reached. Returns {systems, total rounds, converged}.
template <Scalar T, typename Consume>
std::tuple<std::uint64_t, std::uint64_t, bool> run_systems(const SparseMatrix<T>& c,
                                                           const NoiseSpec& noise_in,
                                                           const SeConfig& cfg, Consume consume) {
  validate(cfg);
  NoiseSpec noise = noise_in;
  noise.dimension = c.order();
  const auto n = static_cast<std::size_t>(c.order());
  std::vector<double> phi(n);
  std::vector<T> b(n);
  const std::vector<T> x0(n, T{});
  std::uint64_t rounds = 0;
  for (std::uint64_t s = 1; s <= cfg.stop.max_cycles; ++s) {
    draw(noise, s, phi);
    std::copy(phi.begin(), phi.end(), b.begin());
    SolveReport<T> rep = cfg.inner == InnerSolver::bicg
                             ? bicg<T>(c, b, x0, cfg.inner_tolerance, cfg.inner_max_iterations)
                             : gauss_seidel<T>(c, b, x0, cfg.inner_tolerance,
                                               cfg.inner_max_iterations);
    rounds += static_cast<std::uint64_t>(rep.iterations);
    if (!rep.converged) {
      throw ConvergenceError("inner " + to_string(cfg.inner) + " solve of system " +
                             std::to_string(s) + " did not converge in " +
                             std::to_string(cfg.inner_max_iterations) + " iterations");
    }
    if (consume(s, rep.x, phi)) {
      return {s, rounds, true};
    }
  }
  return {cfg.stop.max_cycles, rounds, false};
}

}  // namespace

std::string to_string(InnerSolver s) { return s == InnerSolver::bicg ? "bicg" : "gs"; }

InnerSolver parse_inner_solver(const std::string& name) {
  if (name == "bicg") {
    return InnerSolver::bicg;
  }
  if (name == "gs" || name == "gauss-seidel") {
    return InnerSolver::gauss_seidel;
  }
  throw InvalidArgument("unknown inner solver '" + name + "' (expected bicg or gs)");
}

template <Scalar T>
Estimate<T> se_estimate_trace(const SparseMatrix<T>& c, const TraceQuery& q,
                              const NoiseSpec& noise, const SeConfig& cfg) {
  q.validate(c.order());
  detail::SeriesTracker<T> tracker(cfg.stop, true);
  std::vector<T> phi_t(static_cast<std::size_t>(c.order()));
  const auto t0 = Clock::now();
  auto [systems, rounds, converged] = run_systems<T>(
      c, noise, cfg, [&](std::uint64_t s, const std::vector<T>& v, const std::vector<double>& phi) {
        std::copy(phi.begin(), phi.end(), phi_t.begin());
        tracker.push(q.form<T>(phi_t, v));
        return s % cfg.stop.check_interval == 0 && s >= cfg.stop.min_samples &&
               tracker.meets(cfg.stop);
      });
  Estimate<T> est;
  est.sampling_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  est.total_cycles = systems;
  est.total_rounds = rounds;
  est.converged = converged;
  tracker.finalize(est);
  return est;
}

template <Scalar T>
EntryEstimates<T> se_estimate_inverse_elements(const SparseMatrix<T>& c, const EntryList& entries,
                                               const NoiseSpec& noise, const SeConfig& cfg) {
  if (entries.empty()) {
    throw InvalidArgument("se_estimate_inverse_elements: entry list is empty");
  }
  for (const auto& [i, j] : entries) {
    if (i < 0 || i >= c.order() || j < 0 || j >= c.order()) {
      throw InvalidArgument("requested entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside the matrix");
    }
  }
  EntryList unique = entries;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<detail::SeriesTracker<T>> trackers(unique.size(),
                                                 detail::SeriesTracker<T>(cfg.stop, true));
  const auto t0 = Clock::now();
  auto [systems, rounds, converged] = run_systems<T>(
      c, noise, cfg, [&](std::uint64_t s, const std::vector<T>& v, const std::vector<double>& phi) {
        // phi is real, so conj(phi_j) = phi_j.
        for (std::size_t e = 0; e < unique.size(); ++e) {
          trackers[e].push(v[unique[e].first] * phi[unique[e].second]);
        }
        return s % cfg.stop.check_interval == 0 && s >= cfg.stop.min_samples &&
               std::all_of(trackers.begin(), trackers.end(),
                           [&](const auto& t) { return t.meets(cfg.stop); });
      });
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  EntryEstimates<T> out;
  for (std::size_t e = 0; e < unique.size(); ++e) {
    Estimate<T> est;
    est.total_cycles = systems;
    est.total_rounds = rounds;
    est.converged = converged;
    est.sampling_seconds = seconds;
    trackers[e].finalize(est);
    out.emplace(unique[e], std::move(est));
  }
  return out;
}

template Estimate<double> se_estimate_trace<double>(const SparseMatrix<double>&, const TraceQuery&,
                                                    const NoiseSpec&, const SeConfig&);
template Estimate<cdouble> se_estimate_trace<cdouble>(const SparseMatrix<cdouble>&,
                                                      const TraceQuery&, const NoiseSpec&,
                                                      const SeConfig&);
template EntryEstimates<double> se_estimate_inverse_elements<double>(const SparseMatrix<double>&,
                                                                     const EntryList&,
                                                                     const NoiseSpec&,
                                                                     const SeConfig&);
template EntryEstimates<cdouble> se_estimate_inverse_elements<cdouble>(
    const SparseMatrix<cdouble>&, const EntryList&, const NoiseSpec&, const SeConfig&);

}  // namespace ccinv
