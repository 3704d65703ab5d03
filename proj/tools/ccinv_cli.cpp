#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ccinv/errors.hpp"
#include "ccinv/experiment.hpp"
#include "ccinv/generators.hpp"
#include "ccinv/matrix_market.hpp"
#include "ccinv/run_report.hpp"

using namespace ccinv;

namespace {

struct RunFlags {
  std::string matrix;
  std::string query = "identity";
  std::vector<std::string> entries;
  std::string noise = "z2";
  std::uint64_t seed = 1;
  double tol = 5e-5;
  double abs_tol = 0.0;
  double burn_in_tol = 5e-5;
  std::uint64_t burn_in_max = 100000;
  std::uint64_t max_cycles = 50'000'000;
  std::uint64_t check_interval = 100;
  int replicates = 1;
  int jobs = 1;
  std::string inner = "bicg";
  double inner_tol = 5e-5;
  int inner_max = 100000;
  std::string out;
  std::string dump_series;
  std::string boundary;
  bool force = false;
  bool no_precheck = false;
};

std::vector<index_t> parse_index_list(const std::string& text) {
  std::vector<index_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(std::stoll(item));
    }
  }
  return out;
}

std::pair<index_t, index_t> parse_entry(const std::string& text) {
  const auto v = parse_index_list(text);
  if (v.size() != 2) {
    throw InvalidArgument("--entry expects i,j (0-based), got '" + text + "'");
  }
  return {v[0], v[1]};
}

/// Index files hold whitespace- or comma-separated 0-based indices.
TraceQuery parse_query(const std::string& spec) {
  if (spec == "identity") {
    return TraceQuery::identity();
  }
  if (spec.rfind("diag:", 0) == 0) {
    const std::string arg = spec.substr(5);
    if (std::filesystem::is_regular_file(arg)) {
      std::ifstream in(arg);
      std::stringstream buf;
      buf << in.rdbuf();
      std::string text = buf.str();
      std::replace_if(text.begin(), text.end(), [](char ch) { return std::isspace(ch) != 0; }, ',');
      return TraceQuery::diagonal_indicator(parse_index_list(text));
    }
    return TraceQuery::diagonal_indicator(parse_index_list(arg));
  }
  if (spec.rfind("mm:", 0) == 0) {
    return TraceQuery::general(read_matrix_market(std::filesystem::path(spec.substr(3))));
  }
  throw InvalidArgument("unknown --q '" + spec + "' (identity, diag:<...> or mm:<file>)");
}

void add_run_flags(CLI::App* sub, RunFlags& f, bool se_flags) {
  sub->add_option("--matrix", f.matrix, "Matrix Market input")->required()->check(CLI::ExistingFile);
  sub->add_option("--q", f.query,
                  "Trace weighting: identity, diag:<index file or i,j,..> or mm:<Matrix Market file>");
  sub->add_option("--entry", f.entries, "Estimate (C^-1)_ij instead of a trace; repeatable, i,j");
  sub->add_option("--noise", f.noise, "Noise family")->check(CLI::IsMember({"z2", "gaussian"}));
  sub->add_option("--seed", f.seed, "Base seed; replicate r uses seed + r");
  sub->add_option("--tol", f.tol, "Relative MC standard error target");
  sub->add_option("--abs-tol", f.abs_tol, "Absolute MC standard error floor");
  sub->add_option("--max-cycles", f.max_cycles, "Cap on post-burn-in cycles or systems");
  sub->add_option("--check-interval", f.check_interval, "Cycles between stopping checks");
  sub->add_option("--replicates", f.replicates, "Independent replicates")->check(CLI::PositiveNumber);
  sub->add_option("--jobs", f.jobs, "Replicates run concurrently")->check(CLI::PositiveNumber);
  sub->add_option("--report,--out", f.out, "Write the JSON run report here");
  sub->add_option("--dump-series", f.dump_series, "CSV of replicate 0's sample series");
  sub->add_option("--boundary", f.boundary, "Boundary-condition note for the report");
  if (se_flags) {
    sub->add_option("--inner", f.inner, "Inner solver")->check(CLI::IsMember({"bicg", "gs"}));
    sub->add_option("--inner-tol", f.inner_tol, "Inner relative successive-change tolerance");
    sub->add_option("--inner-max", f.inner_max, "Inner iteration cap");
  } else {
    sub->add_option("--burnin-tol,--burn-in-tol", f.burn_in_tol, "Coupling tolerance for the burn-in");
    sub->add_option("--burnin-max,--burn-in-max", f.burn_in_max, "Cap on burn-in cycles");
    sub->add_flag("--force", f.force, "Run even if the spectral-radius precheck fails");
    sub->add_flag("--no-precheck", f.no_precheck, "Skip the spectral-radius precheck");
  }
}

ExperimentConfig to_config(const RunFlags& f, Method method) {
  ExperimentConfig cfg;
  cfg.matrix_path = f.matrix;
  cfg.method = method;
  cfg.query = parse_query(f.query);
  for (const auto& e : f.entries) {
    cfg.entries.push_back(parse_entry(e));
  }
  cfg.noise = parse_noise_family(f.noise);
  cfg.seed = f.seed;
  cfg.replicates = f.replicates;
  cfg.jobs = f.jobs;
  cfg.stop.relative_tolerance = f.tol;
  cfg.stop.absolute_tolerance = f.abs_tol;
  cfg.stop.max_cycles = f.max_cycles;
  cfg.stop.check_interval = f.check_interval;
  cfg.stop.keep_series = true;
  cfg.burn_in_tolerance = f.burn_in_tol;
  cfg.burn_in_max_cycles = f.burn_in_max;
  cfg.inner = parse_inner_solver(f.inner);
  cfg.inner_tolerance = f.inner_tol;
  cfg.inner_max_iterations = f.inner_max;
  cfg.force = f.force;
  cfg.precheck = !f.no_precheck;
  cfg.boundary = f.boundary;
  if (!f.dump_series.empty()) {
    cfg.dump_series = f.dump_series;
  }
  return cfg;
}

int run(const RunFlags& f, Method method) {
  const RunReport rep = run_experiment(to_config(f, method));
  std::cout << render_report(rep);
  if (!f.out.empty()) {
    save_report(rep, f.out);
  }
  if (!rep.converged) {
    std::cerr << "error: stopping rule not met within the cycle cap\n";
    return static_cast<int>(ExitCode::non_convergence);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inversion of large sparse matrices by correlated Markov chains"};
  app.set_config("--config", "", "Key = value configuration file; command-line flags win");
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a test matrix");
  gen->require_subcommand(1);

  // Ten generations with every parent recorded reproduce the reference nonzero counts
  // (424970 against 424978 at 50000 animals and 5000 herds).
  PedigreeOptions ped;
  ped.generations = 10;
  ped.unknown_parent_fraction = 0.0;
  MixedModelSpec mm;
  std::string ws_out;
  auto* ws = gen->add_subcommand("wu-schaeffer", "Mixed model matrix with asymmetric relationships");
  ws->add_option("--animals", ped.n_animals)->required();
  ws->add_option("--herds", ped.n_herds)->required();
  ws->add_option("--generations", ped.generations, "Discrete generations");
  ws->add_option("--unknown-fraction", ped.unknown_parent_fraction,
                 "Probability that a parent is unrecorded");
  ws->add_option("--lambda", mm.lambda, "Family weight in [0, 1]");
  ws->add_option("--ratio", mm.variance_ratio, "sigma_e^2 / sigma_a^2");
  ws->add_option("--seed", ped.seed);
  ws->add_option("--out", ws_out)->required();

  LatticeSpec lat;
  std::string dirac_out;
  auto* dirac = gen->add_subcommand("dirac", "Free Wilson-Dirac operator, periodic boundaries");
  dirac->add_option("--n0", lat.extents[0], "Time extent");
  dirac->add_option("--n1", lat.extents[1]);
  dirac->add_option("--n2", lat.extents[2]);
  dirac->add_option("--n3", lat.extents[3]);
  dirac->add_option("--k", lat.hopping, "Hopping constant");
  dirac->add_option("--out", dirac_out)->required();

  std::string pre_matrix;
  auto* pre = app.add_subcommand("precheck", "Estimate sp(T) and sp(S); exit 3 when either >= 1");
  pre->add_option("--matrix", pre_matrix)->required()->check(CLI::ExistingFile);

  RunFlags cc_flags, gs_flags, se_flags, oracle_flags;
  auto* cc = app.add_subcommand("invert-cc", "Correlated chains estimate");
  add_run_flags(cc, cc_flags, false);
  auto* gs = app.add_subcommand("invert-gs", "Gibbs sampler estimate (hermitian matrices)");
  add_run_flags(gs, gs_flags, false);
  auto* se = app.add_subcommand("invert-se", "Stochastic estimation by repeated solves");
  add_run_flags(se, se_flags, true);
  auto* oracle = app.add_subcommand("oracle", "Dense LU reference");
  add_run_flags(oracle, oracle_flags, false);

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "Compare two run reports");
  cmp->add_option("a", cmp_a)->required()->check(CLI::ExistingFile);
  cmp->add_option("b", cmp_b)->required()->check(CLI::ExistingFile);

  std::string rep_in, rep_base;
  auto* rep = app.add_subcommand("report", "Render a run report");
  rep->add_option("report", rep_in)->required()->check(CLI::ExistingFile);
  rep->add_option("--baseline", rep_base, "Normalize times to this report's time per cycle")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*ws) {
      const Pedigree p = simulate_pedigree(ped);
      const RealMatrix c = build_mixed_model_matrix(p, mm);
      write_matrix_market(c, std::filesystem::path(ws_out));
      std::cout << "wrote " << ws_out << ": order " << c.order() << ", nnz " << c.nnz() << '\n';
    } else if (*dirac) {
      const ComplexMatrix c = build_dirac_matrix(lat);
      write_matrix_market(c, std::filesystem::path(dirac_out));
      std::cout << "wrote " << dirac_out << ": order " << c.order() << ", nnz " << c.nnz()
                << " (periodic boundaries)\n";
    } else if (*pre) {
      const AnyMatrix c = read_matrix_market(std::filesystem::path(pre_matrix));
      const PrecheckInfo p = precheck(c);
      std::cout << "sp(T) = " << p.sp_t << (p.sp_t_converged ? "" : " (not settled)") << '\n'
                << "sp(S) = " << p.sp_s << (p.sp_s_converged ? "" : " (not settled)") << '\n'
                << (p.passed ? "pass" : "fail: the chains would diverge") << '\n';
      return p.passed ? 0 : static_cast<int>(ExitCode::divergence);
    } else if (*cc) {
      return run(cc_flags, Method::cc);
    } else if (*gs) {
      return run(gs_flags, Method::gs);
    } else if (*se) {
      return run(se_flags, Method::se);
    } else if (*oracle) {
      return run(oracle_flags, Method::oracle);
    } else if (*cmp) {
      const RunReport a = load_report(cmp_a);
      const RunReport b = load_report(cmp_b);
      std::cout << render_comparison(a, b, compare(a, b));
    } else if (*rep) {
      const RunReport r = load_report(rep_in);
      if (!rep_base.empty()) {
        const RunReport b = load_report(rep_base);
        std::cout << render_report(r, &b);
      } else {
        std::cout << render_report(r);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(exit_code_for(e));
  }
  return 0;
}
