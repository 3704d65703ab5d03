#include "ccinv/experiment.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "ccinv/diagnostics.hpp"
#include "ccinv/errors.hpp"
#include "ccinv/iter_solvers.hpp"
#include "ccinv/matrix_market.hpp"

namespace ccinv {

std::string to_string(Method m) {
  switch (m) {
    case Method::cc:
      return "cc";
    case Method::gs:
      return "gs";
    case Method::se:
      return "se";
    case Method::oracle:
      return "oracle";
  }
  return "cc";
}

Method parse_method(const std::string& name) {
  if (name == "cc") {
    return Method::cc;
  }
  if (name == "gs") {
    return Method::gs;
  }
  if (name == "se") {
    return Method::se;
  }
  if (name == "oracle") {
    return Method::oracle;
  }
  throw InvalidArgument("unknown method '" + name + "' (expected cc, gs, se or oracle)");
}

ExitCode exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e) != nullptr) {
    return ExitCode::divergence;
  }
  if (dynamic_cast<const ConvergenceError*>(&e) != nullptr) {
    return ExitCode::non_convergence;
  }
  if (dynamic_cast<const IoError*>(&e) != nullptr) {
    return ExitCode::io;
  }
  if (dynamic_cast<const InvalidArgument*>(&e) != nullptr) {
    return ExitCode::usage;
  }
  return ExitCode::numerical;
}

void ExperimentConfig::validate() const {
  if (matrix_path.has_value() == (matrix != nullptr)) {
    throw InvalidArgument("exactly one matrix source (file or in-memory matrix) is required");
  }
  if (replicates < 1) {
    throw InvalidArgument("replicate count must be at least 1");
  }
  if (jobs < 1) {
    throw InvalidArgument("--jobs must be at least 1");
  }
  if (!(burn_in_tolerance > 0.0) || !(inner_tolerance > 0.0)) {
    throw InvalidArgument("tolerances must be positive");
  }
  if (stop.relative_tolerance <= 0.0 && stop.absolute_tolerance <= 0.0) {
    throw InvalidArgument("at least one of the relative and absolute tolerances must be positive");
  }
}

MatrixInfo describe_matrix(const AnyMatrix& c, const std::string& source) {
  MatrixInfo m;
  m.source = source;
  m.order = order_of(c);
  m.nnz = nnz_of(c);
  std::ostringstream fp;
  fp << std::hex << std::setw(16) << std::setfill('0') << fingerprint_of(c);
  m.fingerprint = fp.str();
  m.complex = is_complex_matrix(c);
  m.hermitian = std::visit([](const auto& a) { return a.is_hermitian(); }, c);
  return m;
}

PrecheckInfo precheck(const AnyMatrix& c) {
  PrecheckInfo p;
  std::visit(
      [&](const auto& a) {
        const SpectralEstimate t = spectral_radius_estimate(a, IterationOperator::lower_sweep);
        const SpectralEstimate s = spectral_radius_estimate(a, IterationOperator::adjoint_sweep);
        p.sp_t = t.radius;
        p.sp_s = s.radius;
        p.sp_t_converged = t.converged;
        p.sp_s_converged = s.converged;
      },
      c);
  p.passed = p.sp_t < 1.0 && p.sp_s < 1.0;
  return p;
}

namespace {

/// One replicate, already reduced to complex scalars.
struct ReplicateResult {
  cdouble value;
  double se = 0.0, se_re = 0.0, se_im = 0.0;
  double variance = 0.0;
  double ess = 0.0;
  std::uint64_t burn_in = 0;
  std::uint64_t sampling = 0;
  std::uint64_t rounds = 0;
  bool converged = true;
  double burn_s = 0.0, sample_s = 0.0;
  std::vector<EntryInfo> entries;
  std::vector<cdouble> series;
};

template <Scalar T>
ReplicateResult from_estimate(Estimate<T>&& e, bool keep_series) {
  ReplicateResult r;
  r.value = cdouble(e.value);
  r.se = e.mc_std_error;
  r.se_re = e.mc_std_error_real;
  r.se_im = e.mc_std_error_imag;
  r.variance = e.sample_variance;
  r.ess = e.effective_length;
  r.burn_in = e.burn_in_cycles;
  r.sampling = e.sampling_cycles();
  r.rounds = e.total_rounds;
  r.converged = e.converged;
  r.burn_s = e.burn_in_seconds;
  r.sample_s = e.sampling_seconds;
  if (keep_series) {
    r.series.assign(e.series.begin(), e.series.end());
  }
  return r;
}

template <Scalar T>
ReplicateResult from_entries(EntryEstimates<T>&& m) {
  ReplicateResult r;
  bool first = true;
  for (auto& [ij, e] : m) {
    if (first) {
      r = from_estimate(std::move(e), false);
      first = false;
    }
    r.converged = r.converged && e.converged;
    r.entries.push_back({ij.first, ij.second, cdouble(e.value), e.mc_std_error,
                         e.effective_length});
  }
  return r;
}

template <Scalar T>
ReplicateResult run_one(const SparseMatrix<T>& c, const ExperimentConfig& cfg, std::uint64_t seed,
                        bool keep_series) {
  NoiseSpec noise{cfg.noise, seed, c.order()};
  BurnInConfig<T> burn;
  burn.tolerance = cfg.burn_in_tolerance;
  burn.max_cycles = cfg.burn_in_max_cycles;
  const bool elements = !cfg.entries.empty();
  switch (cfg.method) {
    case Method::cc:
      if (elements) {
        return from_entries(estimate_inverse_elements(c, cfg.entries, noise, burn, cfg.stop));
      }
      return from_estimate(estimate_trace(c, cfg.query, noise, burn, cfg.stop), keep_series);
    case Method::gs:
      if (elements) {
        throw InvalidArgument("the Gibbs method estimates traces only; use cc for elements");
      }
      return from_estimate(estimate_trace_gibbs(c, cfg.query, noise, burn, cfg.stop), keep_series);
    case Method::se: {
      SeConfig se;
      se.inner = cfg.inner;
      se.inner_tolerance = cfg.inner_tolerance;
      se.inner_max_iterations = cfg.inner_max_iterations;
      se.stop = cfg.stop;
      if (elements) {
        return from_entries(se_estimate_inverse_elements(c, cfg.entries, noise, se));
      }
      return from_estimate(se_estimate_trace(c, cfg.query, noise, se), keep_series);
    }
    case Method::oracle: {
      const auto t0 = std::chrono::steady_clock::now();
      const DenseMatrix<T> inv = dense_lu_inverse(c);
      ReplicateResult r;
      if (elements) {
        for (const auto& [i, j] : cfg.entries) {
          if (i < 0 || i >= c.order() || j < 0 || j >= c.order()) {
            throw InvalidArgument("requested entry outside the matrix");
          }
          r.entries.push_back({i, j, cdouble(inv(i, j)), 0.0, 0.0});
        }
        r.value = r.entries.front().value;
      } else {
        r.value = cdouble(dense_trace(cfg.query, inv));
      }
      r.sample_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return r;
    }
  }
  throw InvalidArgument("unknown method");
}

bool has_negative_diagonal(const RealMatrix& c) {
  for (double d : c.diagonal()) {
    if (d < 0.0) {
      return true;
    }
  }
  return false;
}

void write_series(const std::filesystem::path& path, const std::vector<cdouble>& series) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write series dump " + path.string());
  }
  out << "sample,re,im\n" << std::setprecision(17);
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << k << ',' << series[k].real() << ',' << series[k].imag() << '\n';
  }
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::shared_ptr<const AnyMatrix> source = cfg.matrix;
  std::string label = cfg.matrix_label;
  if (cfg.matrix_path) {
    source = std::make_shared<const AnyMatrix>(read_matrix_market(*cfg.matrix_path));
    if (label.empty()) {
      label = cfg.matrix_path->string();
    }
  }
  if (label.empty()) {
    label = "in-memory";
  }
  cfg.query.validate(order_of(*source));

  RunReport rep;
  rep.method = to_string(cfg.method);
  rep.matrix = describe_matrix(*source, label);
  rep.query = cfg.entries.empty() ? cfg.query.describe()
                                  : "entries[" + std::to_string(cfg.entries.size()) + "]";
  rep.noise = to_string(cfg.noise);
  rep.seed = cfg.seed;
  rep.relative_tolerance = cfg.stop.relative_tolerance;
  rep.absolute_tolerance = cfg.stop.absolute_tolerance;
  rep.boundary = cfg.boundary;
  rep.replicates = cfg.replicates;
  const bool chains = cfg.method == Method::cc || cfg.method == Method::gs;
  if (chains) {
    rep.burn_in_tolerance = cfg.burn_in_tolerance;
  }
  if (cfg.method == Method::se) {
    rep.inner_solver = to_string(cfg.inner);
    rep.inner_tolerance = cfg.inner_tolerance;
  }

  // The chain sweeps need sqrt(c_ii); a negative real diagonal forces complex arithmetic.
  std::shared_ptr<const AnyMatrix> work = source;
  if (chains) {
    if (const auto* r = std::get_if<RealMatrix>(source.get()); r && has_negative_diagonal(*r)) {
      work = std::make_shared<const AnyMatrix>(to_complex(*r));
    }
  }

  if (chains && cfg.precheck) {
    PrecheckInfo p = precheck(*work);
    p.forced = !p.passed && cfg.force;
    rep.precheck = p;
    if (!p.passed && !cfg.force) {
      std::ostringstream msg;
      msg << "precheck failed: sp(T) = " << p.sp_t << ", sp(S) = " << p.sp_s
          << "; the chains would diverge (use --force to run anyway)";
      throw DivergenceError(msg.str(), 0, {});
    }
  }

  const int r_count = cfg.replicates;
  std::vector<ReplicateResult> results(static_cast<std::size_t>(r_count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(r_count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < r_count; r = next++) {
      try {
        const bool keep = r == 0 && cfg.dump_series.has_value();
        results[r] = std::visit(
            [&](const auto& c) { return run_one(c, cfg, cfg.seed + static_cast<std::uint64_t>(r), keep); },
            *work);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const int threads = std::min(cfg.jobs, r_count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  const double n = static_cast<double>(r_count);
  rep.converged = true;
  TimingInfo& t = rep.timing;
  double burn_cycles = 0.0, samp_cycles = 0.0, rounds = 0.0;
  // Replicate estimates are pooled weighted by effective length (equal weights for the oracle).
  double weight_sum = 0.0;
  for (const auto& res : results) {
    weight_sum += res.ess > 0.0 ? res.ess : 1.0;
  }
  for (const auto& res : results) {
    rep.estimate += res.value * ((res.ess > 0.0 ? res.ess : 1.0) / weight_sum);
    rep.mc_std_error += res.se / n;
    rep.mc_std_error_real += res.se_re / n;
    rep.mc_std_error_imag += res.se_im / n;
    rep.sample_variance += res.variance / n;
    rep.effective_length += res.ess / n;
    rep.converged = rep.converged && res.converged;
    burn_cycles += static_cast<double>(res.burn_in) / n;
    samp_cycles += static_cast<double>(res.sampling) / n;
    rounds += static_cast<double>(res.rounds) / n;
    t.burn_in_seconds += res.burn_s / n;
    t.sampling_seconds += res.sample_s / n;
    t.per_burn_in_cycle += ratio(res.burn_s, static_cast<double>(res.burn_in)) / n;
    t.per_cycle += ratio(res.sample_s, static_cast<double>(res.sampling)) / n;
    t.per_effective_cycle += ratio(res.sample_s, res.ess) / n;
    t.per_round += ratio(res.sample_s, static_cast<double>(res.rounds)) / n;
    t.per_system += ratio(res.sample_s, static_cast<double>(res.sampling)) / n;
    rep.replicate_estimates.push_back(res.value);
    rep.replicate_std_errors.push_back(res.se);
  }
  t.total_seconds = t.burn_in_seconds + t.sampling_seconds;
  rep.burn_in_cycles = static_cast<std::uint64_t>(std::llround(burn_cycles));
  if (cfg.method == Method::se) {
    rep.systems = static_cast<std::uint64_t>(std::llround(samp_cycles));
    rep.total_rounds = static_cast<std::uint64_t>(std::llround(rounds));
    rep.rounds_per_system = ratio(rounds, samp_cycles);
    t.per_cycle = 0.0;
    t.per_effective_cycle = 0.0;
  } else {
    rep.sampling_cycles = static_cast<std::uint64_t>(std::llround(samp_cycles));
    t.per_round = 0.0;
    t.per_system = 0.0;
  }
  if (cfg.method == Method::oracle) {
    rep.exact_value = rep.estimate;
  }
  if (r_count > 1) {
    rep.empirical_std_error = empirical_std_error(std::span<const cdouble>(rep.replicate_estimates));
  }
  if (r_count == 1 || cfg.method == Method::oracle) {
    rep.entries = results.front().entries;
  } else {
    // Element-wise replicate means.
    rep.entries = results.front().entries;
    for (std::size_t e = 0; e < rep.entries.size(); ++e) {
      cdouble v{};
      double se = 0.0;
      for (const auto& res : results) {
        v += res.entries[e].value / n;
        se += res.entries[e].mc_std_error / n;
      }
      rep.entries[e].value = v;
      rep.entries[e].mc_std_error = se;
    }
  }
  if (cfg.dump_series) {
    write_series(*cfg.dump_series, results.front().series);
  }
  return rep;
}

}  // namespace ccinv
