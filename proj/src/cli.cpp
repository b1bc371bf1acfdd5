#include "scvx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "scvx/diagnostics.hpp"
#include "scvx/problems.hpp"

namespace scvx::cli {

namespace fs = std::filesystem;

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConvergedStationary:
      return kExitConverged;
    case SolveStatus::kIterationLimit:
      return kExitIterationLimit;
    case SolveStatus::kLevelSetViolation:
      return kExitAssumptionViolation;
    case SolveStatus::kSubproblemFailure:
      return kExitSolverError;
  }
  return kExitSolverError;
}

OutputPaths default_outputs(const fs::path& config_path) {
  const fs::path dir = config_path.parent_path();
  const std::string stem = config_path.stem().string();
  OutputPaths out;
  out.trace = dir / (stem + ".trace.jsonl");
  out.summary = dir / (stem + ".summary.csv");
  out.report = dir / (stem + ".report.json");
  out.solution = dir / (stem + ".solution.json");
  return out;
}

namespace {

void fill_defaults(RunConfig& cfg, const fs::path& config_path) {
  const OutputPaths d = default_outputs(config_path);
  if (cfg.output.trace.empty()) cfg.output.trace = d.trace;
  if (cfg.output.summary.empty()) cfg.output.summary = d.summary;
  if (cfg.output.report.empty()) cfg.output.report = d.report;
  if (cfg.output.solution.empty()) cfg.output.solution = d.solution;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Loads the config with the SCVX_SEED override applied. Returns nullopt and
// logs the reason on a parse or schema error.
std::optional<RunConfig> load(const fs::path& config_path, std::ostream& log) {
  try {
    RunConfig cfg = load_run_config(config_path);
    apply_seed_override(cfg);
    fill_defaults(cfg, config_path);
    return cfg;
  } catch (const ConfigError& e) {
    log << config_path.string() << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

struct RunOutcome {
  int exit_code = kExitSolverError;
  SummaryRow row;
};

RunOutcome run(const RunConfig& cfg, const std::string& label, std::ostream& log) {
  RunOutcome outcome;
  SummaryRow& row = outcome.row;
  row.config = label;
  row.problem = cfg.problem;
  row.small_step = "skipped";
  row.rate_order = "skipped";
  row.convergence = "skipped";
  row.beta_hat = std::nan("");
  row.gamma_hat = std::nan("");
  row.stationarity = std::nan("");

  const BenchmarkInstance instance = builtin(cfg.problem, cfg.overrides);
  const Vector z0 = cfg.random_initial_guess ? random_start(instance, cfg.seed)
                                             : instance.initial_guess;
  TrustRegionParams params = cfg.trust_region;
  if (!cfg.norm_budget_set) params.norm_budget = instance.norm_budget;

  const double J0 = evaluate_objective(instance.objective, z0);
  const SolveResult result = run_scvx(instance.objective, z0, params);
  outcome.exit_code = exit_code(result.status);
  row.status = to_string(result.status);
  row.exit_code = outcome.exit_code;
  row.iterations = static_cast<int>(result.trace.size());
  row.final_J = result.J_final;
  log << label << ": " << row.status << " after " << row.iterations
      << " iterations, J = " << format_number(result.J_final) << '\n';
  if (!result.message.empty()) log << label << ": " << result.message << '\n';

  {
    std::ofstream out = open_output(cfg.output.trace);
    write_trace(out, result.trace);
  }
  if (!cfg.output.iterates.empty()) {
    std::ofstream out = open_output(cfg.output.iterates);
    write_iterates(out, result.trace);
  }
  if (!cfg.output.plot_dir.empty()) write_plot_data(cfg.output.plot_dir, result.trace);
  {
    std::ofstream out = open_output(cfg.output.solution);
    write_solution(out, {cfg.problem, result.final_z, result.J_final, row.status});
  }

  if (cfg.diagnostics_enabled) {
    const DiagnosticsReport report =
        run_diagnostics(instance, result, J0, params.norm_budget, cfg.diagnostics);
    row.stationarity = report.stationarity;
    row.beta_hat = report.certificate.beta_hat;
    row.gamma_hat = report.certificate.gamma_hat;
    if (report.small_step) row.small_step = report.small_step->pass ? "pass" : "fail";
    row.rate_order = report.rate.status == RateEstimate::Status::kEstimated
                         ? format_number(report.rate.order_q)
                         : to_string(report.rate.status);
    row.convergence = report.weak_convergence_evidence
                          ? to_string(report.strong.label)
                          : std::string("not-stationary");
    std::ofstream out = open_output(cfg.output.report);
    out << report_to_json(report, cfg.problem) << '\n';
  } else {
    row.stationarity = check_stationarity(instance.objective, result.final_z, 1.0);
  }
  return outcome;
}

SummaryRow failed_row(const std::string& label, const std::string& problem,
                      int code, const std::string& status) {
  SummaryRow row;
  row.config = label;
  row.problem = problem;
  row.status = status;
  row.exit_code = code;
  row.final_J = std::nan("");
  row.stationarity = std::nan("");
  row.beta_hat = std::nan("");
  row.gamma_hat = std::nan("");
  row.small_step = "skipped";
  row.rate_order = "skipped";
  row.convergence = "skipped";
  return row;
}

}  // namespace

int solve(const fs::path& config_path, const std::optional<fs::path>& trace_override,
          const std::optional<fs::path>& report_override, std::ostream& log) {
  std::optional<RunConfig> cfg = load(config_path, log);
  if (!cfg) return kExitParseError;
  if (trace_override) cfg->output.trace = *trace_override;
  if (report_override) cfg->output.report = *report_override;

  const std::string label = config_path.filename().string();
  try {
    const RunOutcome outcome = run(*cfg, label, log);
    std::ofstream out = open_output(cfg->output.summary);
    write_summary(out, std::span<const SummaryRow>(&outcome.row, 1));
    return outcome.exit_code;
  } catch (const std::exception& e) {
    log << label << ": solver error: " << e.what() << '\n';
    return kExitSolverError;
  }
}

int bench(const fs::path& dir, const fs::path& out_csv, std::ostream& log) {
  if (!fs::is_directory(dir)) {
    log << dir.string() << ": not a directory\n";
    return kExitParseError;
  }
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      configs.push_back(entry.path());
    }
  }
  std::sort(configs.begin(), configs.end());

  // Runs share nothing but the host has one core, so they run in order.
  std::vector<SummaryRow> rows;
  for (const fs::path& path : configs) {
    const std::string label = path.filename().string();
    const std::optional<RunConfig> cfg = load(path, log);
    if (!cfg) {
      rows.push_back(failed_row(label, "", kExitParseError, "parse-error"));
      continue;
    }
    try {
      rows.push_back(run(*cfg, label, log).row);
    } catch (const std::exception& e) {
      log << label << ": solver error: " << e.what() << '\n';
      rows.push_back(failed_row(label, cfg->problem, kExitSolverError, "solver-error"));
    }
  }

  try {
    std::ofstream out = open_output(out_csv);
    write_summary(out, rows);
  } catch (const std::exception& e) {
    log << e.what() << '\n';
    return kExitSolverError;
  }
  return kExitConverged;
}

int check(const fs::path& config_path, std::ostream& log) {
  std::optional<RunConfig> cfg = load(config_path, log);
  if (!cfg) return kExitParseError;

  try {
    const SolutionFile sol = read_solution(cfg->output.solution);
    if (sol.problem != cfg->problem) {
      log << "solution is for '" << sol.problem << "', config names '"
          << cfg->problem << "'\n";
      return kExitSolverError;
    }
    const BenchmarkInstance instance = builtin(cfg->problem, cfg->overrides);
    require_size(sol.z.size(), instance.objective.dim(), "saved solution");

    // A one-record trace: the point-based probes are meaningful, the
    // sequence-based ones report insufficient data.
    SolveResult point;
    point.final_z = sol.z;
    point.J_final = evaluate_objective(instance.objective, sol.z);
    point.status = SolveStatus::kConvergedStationary;
    IterationRecord rec;
    rec.z = sol.z;
    rec.J = point.J_final;
    point.trace.push_back(rec);

    const double budget =
        cfg->norm_budget_set ? cfg->trust_region.norm_budget : instance.norm_budget;
    const DiagnosticsReport report =
        run_diagnostics(instance, point, point.J_final, budget, cfg->diagnostics);
    std::ofstream out = open_output(cfg->output.report);
    out << report_to_json(report, cfg->problem) << '\n';
    log << cfg->problem << ": stationarity " << format_number(report.stationarity)
        << ", subdifferential " << (report.subdifferential.pass ? "pass" : "fail")
        << ", beta_hat " << format_number(report.certificate.beta_hat) << '\n';
    return report.weak_convergence_evidence ? kExitConverged : kExitIterationLimit;
  } catch (const std::exception& e) {
    log << "check failed: " << e.what() << '\n';
    return kExitSolverError;
  }
}

}  // namespace scvx::cli
