#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ccinv/types.hpp"

namespace ccinv {

inline constexpr const char* kReportSchema = "ccinv.run_report/1";

struct MatrixInfo {
  std::string source;
  index_t order = 0;
  index_t nnz = 0;
  /// Hex FNV-1a digest of the structure and values; compare() matches on it.
  std::string fingerprint;
  bool complex = false;
  bool hermitian = false;
};

struct PrecheckInfo {
  double sp_t = 0.0;
  double sp_s = 0.0;
  bool sp_t_converged = false;
  bool sp_s_converged = false;
  bool passed = false;
  bool forced = false;
};

/// Wall-clock seconds; per-replicate averages when replicates > 1. A zero denominator
/// (no burn-in, say) leaves the per-unit field at 0.
struct TimingInfo {
  double burn_in_seconds = 0.0;
  double sampling_seconds = 0.0;
  double total_seconds = 0.0;
  double per_burn_in_cycle = 0.0;
  double per_cycle = 0.0;
  double per_effective_cycle = 0.0;
  double per_round = 0.0;
  double per_system = 0.0;
};

struct EntryInfo {
  index_t row = 0;
  index_t col = 0;
  cdouble value;
  double mc_std_error = 0.0;
  double effective_length = 0.0;
};

/// The result of one experiment, one JSON object per run.
///
/// Correlated-chain runs fill burn_in_cycles, sampling_cycles and effective_length;
/// stochastic-estimation runs fill systems, total_rounds and rounds_per_system.
struct RunReport {
  std::string schema = kReportSchema;
  std::string method;
  MatrixInfo matrix;
  std::string query;
  std::string noise;
  std::uint64_t seed = 0;
  double relative_tolerance = 0.0;
  double absolute_tolerance = 0.0;
  double burn_in_tolerance = 0.0;
  std::string inner_solver;
  double inner_tolerance = 0.0;
  std::string boundary;
  std::optional<PrecheckInfo> precheck;

  cdouble estimate;
  double mc_std_error = 0.0;
  double mc_std_error_real = 0.0;
  double mc_std_error_imag = 0.0;
  double sample_variance = 0.0;
  double effective_length = 0.0;
  std::optional<double> empirical_std_error;
  std::optional<cdouble> exact_value;

  std::uint64_t burn_in_cycles = 0;
  std::uint64_t sampling_cycles = 0;
  std::uint64_t systems = 0;
  std::uint64_t total_rounds = 0;
  double rounds_per_system = 0.0;
  bool converged = false;

  int replicates = 1;
  std::vector<cdouble> replicate_estimates;
  std::vector<double> replicate_std_errors;
  std::vector<EntryInfo> entries;

  TimingInfo timing;
};

std::string to_json_string(const RunReport& r, int indent = 2);
/// Throws IoError on malformed JSON or a different schema tag.
RunReport report_from_json_string(const std::string& text);

void save_report(const RunReport& r, const std::filesystem::path& path);
RunReport load_report(const std::filesystem::path& path);

struct Comparison {
  cdouble difference;
  /// |a - b| / sqrt(se_a^2 + se_b^2); 0 when both the difference and the errors vanish.
  double z_score = 0.0;
  /// b.total_seconds / a.total_seconds, i.e. how many times faster a ran.
  double time_ratio = 1.0;
};

/// Side-by-side comparison. Throws InvalidArgument when the reports target different
/// matrices (fingerprint) or queries.
Comparison compare(const RunReport& a, const RunReport& b);

/// Plain-text table of the reported quantities. With a baseline, per-unit times are
/// also given as multiples of the baseline's time per cycle.
std::string render_report(const RunReport& r, const RunReport* baseline = nullptr);
std::string render_comparison(const RunReport& a, const RunReport& b, const Comparison& c);

}  // namespace ccinv
