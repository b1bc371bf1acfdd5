#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scvx/diagnostics.hpp"
#include "scvx/problems.hpp"
#include "scvx/scvx.hpp"

namespace scvx {

inline constexpr int kConfigSchemaVersion = 1;

/// Malformed or schema-violating run configuration. line/column are set
/// for JSON syntax errors (1-based); `path` names the offending key for
/// schema errors.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0,
              std::string path = {})
      : Error(what), line_(line), column_(column), path_(std::move(path)) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& path() const { return path_; }

 private:
  int line_;
  int column_;
  std::string path_;
};

struct OutputPaths {
  std::filesystem::path trace;
  std::filesystem::path summary;
  std::filesystem::path report;
  std::filesystem::path solution;
  std::filesystem::path iterates;  ///< optional z sidecar
  std::filesystem::path plot_dir;  ///< optional two-column plot data
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  std::string problem;
  BuiltinOptions overrides;
  std::uint64_t seed = 0;
  bool random_initial_guess = false;
  TrustRegionParams trust_region;
  bool norm_budget_set = false;  ///< otherwise the instance's budget is used
  bool diagnostics_enabled = true;
  DiagnosticsOptions diagnostics;
  OutputPaths output;
};

/// Parses a JSON run configuration. Unknown keys are rejected at every level.
/// Relative output paths are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies the SCVX_SEED environment override, if set.
void apply_seed_override(RunConfig& config);

/// One JSON object per line with keys k, J, L, rho, radius, step_norm,
/// accepted, predicted_decrease, actual_decrease.
void write_trace(std::ostream& out, std::span<const IterationRecord> trace);
/// One JSON object per line with keys k and z.
void write_iterates(std::ostream& out, std::span<const IterationRecord> trace);
/// Files k_J.dat, k_step.dat and k_rho.dat in `dir`.
void write_plot_data(const std::filesystem::path& dir,
                     std::span<const IterationRecord> trace);

struct SolutionFile {
  std::string problem;
  Vector z;
  double J = 0.0;
  std::string status;
};
void write_solution(std::ostream& out, const SolutionFile& solution);
SolutionFile read_solution(const std::filesystem::path& path);

/// Serializes a diagnostics report as pretty-printed JSON.
std::string report_to_json(const DiagnosticsReport& report,
                           const std::string& problem);

struct SummaryRow {
  std::string config;
  std::string problem;
  std::string status;
  int exit_code = 0;
  int iterations = 0;
  double final_J = 0.0;
  double stationarity = 0.0;
  double beta_hat = 0.0;
  double gamma_hat = 0.0;
  std::string small_step;  ///< pass, fail or skipped
  std::string rate_order;  ///< number or the undefined reason
  std::string convergence;
};

/// The fixed CSV header shared by solve summaries and bench tables.
std::string_view summary_header();
void write_summary(std::ostream& out, std::span<const SummaryRow> rows);

}  // namespace scvx
