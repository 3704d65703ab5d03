#pragma once

#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ccinv/cc_sampler.hpp"
#include "ccinv/run_report.hpp"
#include "ccinv/se_estimator.hpp"

namespace ccinv {

enum class Method { cc, gs, se, oracle };

std::string to_string(Method m);
/// Accepts "cc", "gs", "se" or "oracle".
Method parse_method(const std::string& name);

/// Process exit codes of the command-line driver.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  io = 2,
  divergence = 3,
  non_convergence = 4,
  numerical = 5,
};

/// Maps a library exception to its exit code; anything unrecognised is numerical.
ExitCode exit_code_for(const std::exception& e);

struct ExperimentConfig {
  /// Exactly one of the two matrix sources is set.
  std::optional<std::filesystem::path> matrix_path;
  std::shared_ptr<const AnyMatrix> matrix;
  /// Label for in-memory matrices; also recorded e.g. "dirac 4x4x4x4 K=0.1".
  std::string matrix_label;
  /// Boundary-condition note carried into the report.
  std::string boundary;

  Method method = Method::cc;
  TraceQuery query = TraceQuery::identity();
  /// Non-empty switches from the trace to element-wise estimates of C^-1.
  EntryList entries;

  NoiseFamily noise = NoiseFamily::z2;
  std::uint64_t seed = 1;
  /// Replicate r runs with seed + r.
  int replicates = 1;
  int jobs = 1;

  StoppingRule stop;
  double burn_in_tolerance = 5e-5;
  std::uint64_t burn_in_max_cycles = 100000;

  InnerSolver inner = InnerSolver::bicg;
  double inner_tolerance = 5e-5;
  int inner_max_iterations = 100000;

  /// Spectral-radius gate before correlated-chain and Gibbs runs.
  bool precheck = true;
  /// Run even when the gate fails.
  bool force = false;

  /// CSV of replicate 0's trace sample series (columns sample, re, im).
  std::optional<std::filesystem::path> dump_series;

  void validate() const;
};

/// Loads (or takes) the matrix, runs the spectral gate when applicable, then all
/// replicates, and merges them: the estimate is the effective-length weighted replicate
/// mean, mc_std_error the mean per-replicate error and empirical_std_error the spread of
/// the replicate estimates.
///
/// Throws DivergenceError when the gate fails without force. A real matrix with a
/// negative diagonal entry is promoted to complex for the chain methods.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Spectral radii of T = (D + L)^-1 U and S = L (D + U)^-1.
PrecheckInfo precheck(const AnyMatrix& c);

MatrixInfo describe_matrix(const AnyMatrix& c, const std::string& source);

}  // namespace ccinv
