#include "ccinv/run_report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ccinv/errors.hpp"

namespace ccinv {

using nlohmann::json;

namespace {

json complex_json(cdouble v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

cdouble complex_from(const json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

template <typename T>
json optional_json(const std::optional<T>& v) {
  if (!v) {
    return nullptr;
  }
  if constexpr (std::is_same_v<T, cdouble>) {
    return complex_json(*v);
  } else {
    return *v;
  }
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  if constexpr (std::is_same_v<T, cdouble>) {
    return complex_from(j.at(key));
  } else {
    return j.at(key).get<T>();
  }
}

json to_json(const RunReport& r) {
  json j;
  j["schema"] = r.schema;
  j["method"] = r.method;
  j["matrix"] = {{"source", r.matrix.source},           {"order", r.matrix.order},
                 {"nnz", r.matrix.nnz},                 {"fingerprint", r.matrix.fingerprint},
                 {"complex", r.matrix.complex},         {"hermitian", r.matrix.hermitian}};
  j["query"] = r.query;
  j["noise"] = r.noise;
  j["seed"] = r.seed;
  j["relative_tolerance"] = r.relative_tolerance;
  j["absolute_tolerance"] = r.absolute_tolerance;
  j["burn_in_tolerance"] = r.burn_in_tolerance;
  j["inner_solver"] = r.inner_solver;
  j["inner_tolerance"] = r.inner_tolerance;
  j["boundary"] = r.boundary;
  if (r.precheck) {
    const auto& p = *r.precheck;
    j["precheck"] = {{"sp_t", p.sp_t},
                     {"sp_s", p.sp_s},
                     {"sp_t_converged", p.sp_t_converged},
                     {"sp_s_converged", p.sp_s_converged},
                     {"passed", p.passed},
                     {"forced", p.forced}};
  } else {
    j["precheck"] = nullptr;
  }
  j["estimate"] = complex_json(r.estimate);
  j["mc_std_error"] = r.mc_std_error;
  j["mc_std_error_real"] = r.mc_std_error_real;
  j["mc_std_error_imag"] = r.mc_std_error_imag;
  j["sample_variance"] = r.sample_variance;
  j["effective_length"] = r.effective_length;
  j["empirical_std_error"] = optional_json(r.empirical_std_error);
  j["exact_value"] = optional_json(r.exact_value);
  j["burn_in_cycles"] = r.burn_in_cycles;
  j["sampling_cycles"] = r.sampling_cycles;
  j["systems"] = r.systems;
  j["total_rounds"] = r.total_rounds;
  j["rounds_per_system"] = r.rounds_per_system;
  j["converged"] = r.converged;
  j["replicates"] = r.replicates;
  json reps = json::array();
  for (const auto& v : r.replicate_estimates) {
    reps.push_back(complex_json(v));
  }
  j["replicate_estimates"] = reps;
  j["replicate_std_errors"] = r.replicate_std_errors;
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"row", e.row},
                       {"col", e.col},
                       {"value", complex_json(e.value)},
                       {"mc_std_error", e.mc_std_error},
                       {"effective_length", e.effective_length}});
  }
  j["entries"] = entries;
  const auto& t = r.timing;
  j["timing"] = {{"burn_in_seconds", t.burn_in_seconds},
                 {"sampling_seconds", t.sampling_seconds},
                 {"total_seconds", t.total_seconds},
                 {"per_burn_in_cycle", t.per_burn_in_cycle},
                 {"per_cycle", t.per_cycle},
                 {"per_effective_cycle", t.per_effective_cycle},
                 {"per_round", t.per_round},
                 {"per_system", t.per_system}};
  return j;
}

RunReport from_json(const json& j) {
  RunReport r;
  r.schema = j.at("schema").get<std::string>();
  if (r.schema != kReportSchema) {
    throw IoError("unsupported report schema '" + r.schema + "'");
  }
  r.method = j.at("method").get<std::string>();
  const auto& m = j.at("matrix");
  r.matrix.source = m.at("source").get<std::string>();
  r.matrix.order = m.at("order").get<index_t>();
  r.matrix.nnz = m.at("nnz").get<index_t>();
  r.matrix.fingerprint = m.at("fingerprint").get<std::string>();
  r.matrix.complex = m.at("complex").get<bool>();
  r.matrix.hermitian = m.at("hermitian").get<bool>();
  r.query = j.at("query").get<std::string>();
  r.noise = j.at("noise").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.relative_tolerance = j.at("relative_tolerance").get<double>();
  r.absolute_tolerance = j.at("absolute_tolerance").get<double>();
  r.burn_in_tolerance = j.at("burn_in_tolerance").get<double>();
  r.inner_solver = j.at("inner_solver").get<std::string>();
  r.inner_tolerance = j.at("inner_tolerance").get<double>();
  r.boundary = j.at("boundary").get<std::string>();
  if (!j.at("precheck").is_null()) {
    const auto& p = j.at("precheck");
    r.precheck = PrecheckInfo{p.at("sp_t").get<double>(),          p.at("sp_s").get<double>(),
                              p.at("sp_t_converged").get<bool>(), p.at("sp_s_converged").get<bool>(),
                              p.at("passed").get<bool>(),         p.at("forced").get<bool>()};
  }
  r.estimate = complex_from(j.at("estimate"));
  r.mc_std_error = j.at("mc_std_error").get<double>();
  r.mc_std_error_real = j.at("mc_std_error_real").get<double>();
  r.mc_std_error_imag = j.at("mc_std_error_imag").get<double>();
  r.sample_variance = j.at("sample_variance").get<double>();
  r.effective_length = j.at("effective_length").get<double>();
  r.empirical_std_error = optional_from<double>(j, "empirical_std_error");
  r.exact_value = optional_from<cdouble>(j, "exact_value");
  r.burn_in_cycles = j.at("burn_in_cycles").get<std::uint64_t>();
  r.sampling_cycles = j.at("sampling_cycles").get<std::uint64_t>();
  r.systems = j.at("systems").get<std::uint64_t>();
  r.total_rounds = j.at("total_rounds").get<std::uint64_t>();
  r.rounds_per_system = j.at("rounds_per_system").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.replicates = j.at("replicates").get<int>();
  for (const auto& v : j.at("replicate_estimates")) {
    r.replicate_estimates.push_back(complex_from(v));
  }
  r.replicate_std_errors = j.at("replicate_std_errors").get<std::vector<double>>();
  for (const auto& e : j.at("entries")) {
    r.entries.push_back({e.at("row").get<index_t>(), e.at("col").get<index_t>(),
                         complex_from(e.at("value")), e.at("mc_std_error").get<double>(),
                         e.at("effective_length").get<double>()});
  }
  const auto& t = j.at("timing");
  r.timing.burn_in_seconds = t.at("burn_in_seconds").get<double>();
  r.timing.sampling_seconds = t.at("sampling_seconds").get<double>();
  r.timing.total_seconds = t.at("total_seconds").get<double>();
  r.timing.per_burn_in_cycle = t.at("per_burn_in_cycle").get<double>();
  r.timing.per_cycle = t.at("per_cycle").get<double>();
  r.timing.per_effective_cycle = t.at("per_effective_cycle").get<double>();
  r.timing.per_round = t.at("per_round").get<double>();
  r.timing.per_system = t.at("per_system").get<double>();
  return r;
}

std::string format_complex(cdouble v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v.real() << (v.imag() < 0 ? " - " : " + ")
     << std::abs(v.imag()) << "i";
  return os.str();
}

}  // namespace

std::string to_json_string(const RunReport& r, int indent) { return to_json(r).dump(indent); }

RunReport report_from_json_string(const std::string& text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed run report: ") + e.what());
  }
}

void save_report(const RunReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write report " + path.string());
  }
  out << to_json_string(r) << '\n';
  if (!out) {
    throw IoError("failed writing report " + path.string());
  }
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read report " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return report_from_json_string(buf.str());
}

Comparison compare(const RunReport& a, const RunReport& b) {
  if (a.matrix.fingerprint != b.matrix.fingerprint) {
    throw InvalidArgument("reports target different matrices (" + a.matrix.fingerprint + " vs " +
                          b.matrix.fingerprint + ")");
  }
  if (a.query != b.query) {
    throw InvalidArgument("reports target different queries (" + a.query + " vs " + b.query + ")");
  }
  Comparison c;
  c.difference = a.estimate - b.estimate;
  const double gap = std::abs(c.difference);
  const double se = std::hypot(a.mc_std_error, b.mc_std_error);
  if (gap == 0.0) {
    c.z_score = 0.0;
  } else {
    c.z_score = se > 0.0 ? gap / se : std::numeric_limits<double>::infinity();
  }
  const double ta = a.timing.total_seconds;
  const double tb = b.timing.total_seconds;
  if (ta == tb) {
    c.time_ratio = 1.0;
  } else {
    c.time_ratio = ta > 0.0 ? tb / ta : std::numeric_limits<double>::infinity();
  }
  return c;
}

std::string render_report(const RunReport& r, const RunReport* baseline) {
  std::ostringstream os;
  os << std::setprecision(6);
  auto row = [&](const std::string& k, const auto& v) {
    os << "  " << std::left << std::setw(28) << k << v << '\n';
  };
  os << "method " << r.method << " on " << r.matrix.source << " (order " << r.matrix.order
     << ", nnz " << r.matrix.nnz << ")\n";
  row("query", r.query);
  row("noise", r.noise + " seed " + std::to_string(r.seed));
  if (!r.boundary.empty()) {
    row("boundary", r.boundary);
  }
  if (r.precheck) {
    row("sp(T)", r.precheck->sp_t);
    row("sp(S)", r.precheck->sp_s);
  }
  if (r.exact_value) {
    row("exact value", format_complex(*r.exact_value));
  }
  row("estimate", format_complex(r.estimate));
  row("variance", r.sample_variance);
  row("MC std error", r.mc_std_error);
  if (r.empirical_std_error) {
    row("empirical std error", *r.empirical_std_error);
  }
  if (r.method == "cc" || r.method == "gs") {
    row("N (burn-in)", r.burn_in_cycles);
    row("M - N", r.sampling_cycles);
    row("effective length", r.effective_length);
  }
  if (r.method == "se") {
    row("rounds per system", r.rounds_per_system);
    row("total rounds", r.total_rounds);
    row("systems", r.systems);
  }
  row("converged", r.converged ? "yes" : "no");
  if (r.replicates > 1) {
    row("replicates", r.replicates);
  }
  const auto& t = r.timing;
  const double unit = baseline != nullptr ? baseline->timing.per_cycle : 0.0;
  auto timed = [&](const std::string& k, double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v << " s";
    if (unit > 0.0) {
      s << "  (" << v / unit << " baseline cycles)";
    }
    row(k, s.str());
  };
  if (r.method == "cc" || r.method == "gs") {
    timed("time per burn-in cycle", t.per_burn_in_cycle);
    timed("time per cycle", t.per_cycle);
    timed("time per eff. cycle", t.per_effective_cycle);
  }
  if (r.method == "se") {
    timed("time per round", t.per_round);
    timed("time per system", t.per_system);
  }
  timed("total time", t.total_seconds);
  for (const auto& e : r.entries) {
    row("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) + ")",
        format_complex(e.value) + " +- " + std::to_string(e.mc_std_error));
  }
  return os.str();
}

std::string render_comparison(const RunReport& a, const RunReport& b, const Comparison& c) {
  std::ostringstream os;
  os << std::setprecision(8);
  os << "  " << std::left << std::setw(20) << "" << std::setw(30) << a.method << b.method << '\n';
  auto row = [&](const std::string& k, const std::string& x, const std::string& y) {
    os << "  " << std::left << std::setw(20) << k << std::setw(30) << x << y << '\n';
  };
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
  };
  row("estimate", format_complex(a.estimate), format_complex(b.estimate));
  row("MC std error", num(a.mc_std_error), num(b.mc_std_error));
  row("total time [s]", num(a.timing.total_seconds), num(b.timing.total_seconds));
  os << "  z-score " << num(c.z_score) << ", time ratio " << num(c.time_ratio) << " ("
     << a.method << " vs " << b.method << ")\n";
  return os.str();
}

}  // namespace ccinv
