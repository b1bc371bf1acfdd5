#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "scvx/io.hpp"
#include "scvx/scvx.hpp"

namespace scvx::cli {

enum ExitCode : int {
  kExitConverged = 0,
  kExitParseError = 1,
  kExitIterationLimit = 2,
  kExitAssumptionViolation = 3,
  kExitSolverError = 4,
};

int exit_code(SolveStatus status);

/// Output file defaults: <config stem>.trace.jsonl, .summary.csv,
/// .report.json and .solution.json next to the config file.
OutputPaths default_outputs(const std::filesystem::path& config_path);

/// Loads, solves, runs diagnostics and writes every configured output.
/// Returns the process exit code; progress and errors go to `log`.
int solve(const std::filesystem::path& config_path,
          const std::optional<std::filesystem::path>& trace_override,
          const std::optional<std::filesystem::path>& report_override,
          std::ostream& log);

/// Runs every *.json config in `dir` (sorted by file name) and writes one
/// summary row per config to `out_csv`. Failed runs are recorded, not fatal.
int bench(const std::filesystem::path& dir, const std::filesystem::path& out_csv,
          std::ostream& log);

/// Point diagnostics on the solution file saved by a previous solve of the
/// same config. Exit 0 when the saved point is stationary, 2 when it is not.
int check(const std::filesystem::path& config_path, std::ostream& log);

}  // namespace scvx::cli
