#include "scvx/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace scvx {

using json = nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) +
                          "' must be an object",
                      0, 0, path);
  }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + join(path, it.key()) + "'", 0, 0,
                        join(path, it.key()));
    }
  }
}

double number(const json& j, const std::string& key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw ConfigError("'" + join(path, key) + "' must be a number", 0, 0,
                      join(path, key));
  }
  return v.get<double>();
}

std::int64_t integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("'" + join(path, key) + "' must be an integer", 0, 0,
                      join(path, key));
  }
  return v.get<std::int64_t>();
}

bool boolean(const json& j, const std::string& key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_boolean()) {
    throw ConfigError("'" + join(path, key) + "' must be a boolean", 0, 0,
                      join(path, key));
  }
  return v.get<bool>();
}

std::string string(const json& j, const std::string& key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw ConfigError("'" + join(path, key) + "' must be a string", 0, 0,
                      join(path, key));
  }
  return v.get<std::string>();
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

void parse_trust_region(const json& j, RunConfig& cfg) {
  const std::string path = "trust_region";
  require_object(j, path);
  reject_unknown(j,
                 {"rho0", "rho1", "rho2", "shrink_factor", "grow_factor",
                  "r_init", "r_min", "r_max", "stop_predicted_decrease",
                  "stop_step_norm", "max_iterations", "norm_budget",
                  "relinearize_on_reject"},
                 path);
  TrustRegionParams& p = cfg.trust_region;
  auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = number(j, key, path);
  };
  num("rho0", p.rho0);
  num("rho1", p.rho1);
  num("rho2", p.rho2);
  num("shrink_factor", p.shrink_factor);
  num("grow_factor", p.grow_factor);
  num("r_init", p.r_init);
  num("r_min", p.r_min);
  num("r_max", p.r_max);
  num("stop_predicted_decrease", p.stop_predicted_decrease);
  num("stop_step_norm", p.stop_step_norm);
  if (j.contains("norm_budget")) {
    p.norm_budget = number(j, "norm_budget", path);
    cfg.norm_budget_set = true;
  }
  if (j.contains("max_iterations")) {
    p.max_iterations = static_cast<int>(integer(j, "max_iterations", path));
  }
  if (j.contains("relinearize_on_reject")) {
    p.relinearize_on_reject = boolean(j, "relinearize_on_reject", path);
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0, 0, path);
  }
}

void parse_diagnostics(const json& j, RunConfig& cfg) {
  const std::string path = "diagnostics";
  require_object(j, path);
  reject_unknown(j,
                 {"enabled", "norm", "delta", "beta_samples", "gamma_samples",
                  "small_step_probes", "subdifferential_directions", "m_tail",
                  "activity_tol", "stationarity_probe_radius",
                  "stationarity_tol"},
                 path);
  DiagnosticsOptions& d = cfg.diagnostics;
  if (j.contains("enabled")) cfg.diagnostics_enabled = boolean(j, "enabled", path);
  if (j.contains("norm")) {
    try {
      d.norm = parse_norm(string(j, "norm", path));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what(), 0, 0, join(path, "norm"));
    }
  }
  auto positive = [&](const char* key, double& field) {
    if (!j.contains(key)) return;
    field = number(j, key, path);
    if (!(field > 0.0)) {
      throw ConfigError("'" + join(path, key) + "' must be positive", 0, 0,
                        join(path, key));
    }
  };
  auto count = [&](const char* key, int& field) {
    if (!j.contains(key)) return;
    const auto v = integer(j, key, path);
    if (v <= 0 || v > 1000000) {
      throw ConfigError("'" + join(path, key) + "' out of range", 0, 0,
                        join(path, key));
    }
    field = static_cast<int>(v);
  };
  positive("delta", d.delta);
  positive("activity_tol", d.activity_tol);
  positive("stationarity_probe_radius", d.stationarity_probe_radius);
  positive("stationarity_tol", d.stationarity_tol);
  count("beta_samples", d.beta_samples);
  count("gamma_samples", d.gamma_samples);
  count("small_step_probes", d.small_step_probes);
  count("subdifferential_directions", d.subdifferential_directions);
  count("m_tail", d.m_tail);
}

void parse_output(const json& j, RunConfig& cfg, const std::filesystem::path& base) {
  const std::string path = "output";
  require_object(j, path);
  reject_unknown(j, {"trace", "summary", "report", "solution", "iterates", "plot_dir"},
                 path);
  auto resolve = [&](const char* key, std::filesystem::path& field) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    std::filesystem::path p = string(j, key, path);
    field = p.is_absolute() || base.empty() ? p : base / p;
  };
  resolve("trace", cfg.output.trace);
  resolve("summary", cfg.output.summary);
  resolve("report", cfg.output.report);
  resolve("solution", cfg.output.solution);
  resolve("iterates", cfg.output.iterates);
  resolve("plot_dir", cfg.output.plot_dir);
}

}  // namespace

RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ConfigError("config parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(column) + ": " + e.what(),
                      line, column);
  }

  RunConfig cfg;
  require_object(root, "");
  reject_unknown(root,
                 {"schema_version", "problem", "seed", "initial_guess",
                  "trust_region", "diagnostics", "output"},
                 "");
  if (!root.contains("schema_version")) {
    throw ConfigError("missing 'schema_version'", 0, 0, "schema_version");
  }
  cfg.schema_version = static_cast<int>(integer(root, "schema_version", ""));
  if (cfg.schema_version != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version " +
                          std::to_string(cfg.schema_version),
                      0, 0, "schema_version");
  }

  if (!root.contains("problem")) throw ConfigError("missing 'problem'", 0, 0, "problem");
  const json& problem = root.at("problem");
  require_object(problem, "problem");
  reject_unknown(problem, {"name", "lambda", "nodes", "dt"}, "problem");
  if (!problem.contains("name")) {
    throw ConfigError("missing 'problem.name'", 0, 0, "problem.name");
  }
  cfg.problem = string(problem, "name", "problem");
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), cfg.problem) == names.end()) {
    throw ConfigError("unknown problem '" + cfg.problem + "'", 0, 0, "problem.name");
  }
  if (problem.contains("lambda")) {
    cfg.overrides.lambda = number(problem, "lambda", "problem");
    if (!(*cfg.overrides.lambda > 0.0)) {
      throw ConfigError("'problem.lambda' must be positive", 0, 0, "problem.lambda");
    }
  }
  if (problem.contains("nodes")) {
    const auto nodes = integer(problem, "nodes", "problem");
    if (nodes < 2 || nodes > 10000) {
      throw ConfigError("'problem.nodes' out of range", 0, 0, "problem.nodes");
    }
    cfg.overrides.nodes = static_cast<int>(nodes);
  }
  if (problem.contains("dt")) {
    cfg.overrides.dt = number(problem, "dt", "problem");
    if (!(*cfg.overrides.dt > 0.0)) {
      throw ConfigError("'problem.dt' must be positive", 0, 0, "problem.dt");
    }
  }

  if (root.contains("seed")) {
    const auto seed = integer(root, "seed", "");
    if (seed < 0) throw ConfigError("'seed' must be non-negative", 0, 0, "seed");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (root.contains("initial_guess")) {
    const std::string guess = string(root, "initial_guess", "");
    if (guess == "random") {
      cfg.random_initial_guess = true;
    } else if (guess != "default") {
      throw ConfigError("'initial_guess' must be \"default\" or \"random\"", 0, 0,
                        "initial_guess");
    }
  }
  if (root.contains("trust_region")) parse_trust_region(root.at("trust_region"), cfg);
  if (root.contains("diagnostics")) parse_diagnostics(root.at("diagnostics"), cfg);
  if (root.contains("output")) parse_output(root.at("output"), cfg, base_dir);
  cfg.diagnostics.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path.parent_path());
}

void apply_seed_override(RunConfig& config) {
  const char* env = std::getenv("SCVX_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    throw ConfigError(std::string("SCVX_SEED is not an unsigned integer: ") + env);
  }
  config.seed = seed;
  config.diagnostics.seed = seed;
}

void write_trace(std::ostream& out, std::span<const IterationRecord> trace) {
  for (const IterationRecord& rec : trace) {
    json line;
    line["k"] = rec.k;
    line["J"] = rec.J;
    line["L"] = rec.model_value;
    line["rho"] = rec.rho ? json(*rec.rho) : json(nullptr);
    line["radius"] = rec.radius;
    line["step_norm"] = rec.step_norm;
    line["accepted"] = rec.accepted;
    line["predicted_decrease"] = rec.predicted_decrease;
    line["actual_decrease"] = rec.actual_decrease;
    out << line.dump() << '\n';
  }
}

void write_iterates(std::ostream& out, std::span<const IterationRecord> trace) {
  for (const IterationRecord& rec : trace) {
    json line;
    line["k"] = rec.k;
    line["z"] = std::vector<double>(rec.z.data(), rec.z.data() + rec.z.size());
    out << line.dump() << '\n';
  }
}

void write_plot_data(const std::filesystem::path& dir,
                     std::span<const IterationRecord> trace) {
  std::filesystem::create_directories(dir);
  std::ofstream J(dir / "k_J.dat");
  std::ofstream step(dir / "k_step.dat");
  std::ofstream rho(dir / "k_rho.dat");
  J << std::setprecision(17);
  step << std::setprecision(17);
  rho << std::setprecision(17);
  for (const IterationRecord& rec : trace) {
    J << rec.k << ' ' << rec.J << '\n';
    step << rec.k << ' ' << rec.step_norm << '\n';
    if (rec.rho) rho << rec.k << ' ' << *rec.rho << '\n';
  }
}

void write_solution(std::ostream& out, const SolutionFile& solution) {
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["problem"] = solution.problem;
  doc["z"] = std::vector<double>(solution.z.data(), solution.z.data() + solution.z.size());
  doc["J"] = solution.J;
  doc["status"] = solution.status;
  out << doc.dump(2) << '\n';
}

SolutionFile read_solution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read solution '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed solution file: " + std::string(e.what()));
  }
  SolutionFile sol;
  try {
    sol.problem = doc.at("problem").get<std::string>();
    const auto z = doc.at("z").get<std::vector<double>>();
    sol.z = Eigen::Map<const Vector>(z.data(), static_cast<Eigen::Index>(z.size()));
    sol.J = doc.at("J").get<double>();
    sol.status = doc.at("status").get<std::string>();
  } catch (const json::exception& e) {
    throw Error("malformed solution file: " + std::string(e.what()));
  }
  return sol;
}

namespace {

json samples_to_json(const std::vector<RatioSample>& samples) {
  json arr = json::array();
  for (const RatioSample& s : samples) {
    arr.push_back({{"distance", s.distance}, {"ratio", s.ratio}});
  }
  return arr;
}

std::string tag_kind(InequalityTag::Kind kind) {
  switch (kind) {
    case InequalityTag::Kind::kPath:
      return "path";
    case InequalityTag::Kind::kControlLower:
      return "control-lower";
    case InequalityTag::Kind::kControlUpper:
      return "control-upper";
  }
  return "path";
}

}  // namespace

std::string report_to_json(const DiagnosticsReport& r, const std::string& problem) {
  json doc;
  doc["problem"] = problem;
  doc["status"] = to_string(r.status);
  doc["J_final"] = r.J_final;

  doc["stationarity"] = {{"predicted_decrease", r.stationarity},
                         {"stationary", r.stationary}};
  doc["subdifferential"] = {{"directions", r.subdifferential.directions},
                            {"min_directional_derivative", r.subdifferential.min_estimate},
                            {"tolerance", r.subdifferential.tolerance},
                            {"pass", r.subdifferential.pass}};
  doc["convergence"] = {{"weak_evidence", r.weak_convergence_evidence},
                        {"strong_label", to_string(r.strong.label)},
                        {"strong_reason", r.strong.reason}};

  const SharpMinimumCertificate& c = r.certificate;
  doc["sharp_minimum"] = {{"beta_hat", c.beta_hat},
                          {"gamma_hat", c.gamma_hat},
                          {"delta", c.delta},
                          {"samples", c.samples},
                          {"norm", to_string(c.norm)},
                          {"beta_samples", samples_to_json(c.beta_samples)},
                          {"gamma_samples", samples_to_json(c.gamma_samples)}};

  if (r.small_step) {
    doc["small_step"] = {{"eta", r.small_step->eta},
                         {"epsilon", r.small_step->epsilon},
                         {"probes", r.small_step->probes},
                         {"failures", r.small_step->failures},
                         {"max_step_norm", r.small_step->max_step_norm},
                         {"pass", r.small_step->pass}};
  } else {
    doc["small_step"] = nullptr;
  }

  doc["strong_convergence"] = {
      {"label", to_string(r.strong.label)},
      {"tail_distances", r.strong.tail_distances},
      {"tail_J_gaps", r.strong.tail_J_gaps},
      {"distances_nonincreasing", r.strong.distances_nonincreasing},
      {"worst_inequality_slack", r.strong.worst_inequality_slack},
      {"inequality_holds", r.strong.inequality_holds},
      {"reason", r.strong.reason}};

  doc["ratio_tail"] = {{"tail", r.ratio_tail.tail},
                       {"sufficient", r.ratio_tail.sufficient},
                       {"trending_to_one", r.ratio_tail.trending_to_one}};

  doc["rate"] = {{"status", to_string(r.rate.status)},
                 {"order_q", r.rate.order_q},
                 {"errors", r.rate.errors},
                 {"error_ratios", r.rate.error_ratios},
                 {"superlinear_evidence", r.rate.superlinear_evidence}};

  doc["level_set"] = {{"pass", r.level_set.pass},
                      {"max_J_excess", r.level_set.max_J_excess},
                      {"max_norm", r.level_set.max_norm},
                      {"norm_budget_exceeded", r.level_set.norm_budget_exceeded},
                      {"J_increase", r.level_set.J_increase}};

  if (r.active_set) {
    json active = json::array();
    for (const InequalityTag& t : r.active_set->active) {
      active.push_back({{"kind", tag_kind(t.kind)}, {"node", t.node}, {"index", t.index}});
    }
    doc["active_set"] = {{"active_ineq_count", r.active_set->active_ineq_count},
                         {"threshold", r.active_set->threshold},
                         {"tolerance", r.active_set->tolerance},
                         {"relation", to_string(r.active_set->relation)},
                         {"active", active}};
  } else {
    doc["active_set"] = nullptr;
  }
  return doc.dump(2);
}

std::string_view summary_header() {
  return "config,problem,status,exit_code,iterations,final_J,stationarity,"
         "beta_hat,gamma_hat,small_step,rate_order,convergence";
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows) {
  out << summary_header() << '\n';
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
  };
  for (const SummaryRow& r : rows) {
    out << r.config << ',' << r.problem << ',' << r.status << ',' << r.exit_code
        << ',' << r.iterations << ',' << num(r.final_J) << ','
        << num(r.stationarity) << ',' << num(r.beta_hat) << ','
        << num(r.gamma_hat) << ',' << r.small_step << ',' << r.rate_order << ','
        << r.convergence << '\n';
  }
}

}  // namespace scvx
