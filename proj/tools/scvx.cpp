#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scvx/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sequential convex programming solver with trust-region diagnostics"};
  app.require_subcommand(1);

  std::string config;
  std::string trace;
  std::string report;
  CLI::App* solve = app.add_subcommand("solve", "Solve one configured problem");
  solve->add_option("--config", config, "Run configuration (JSON)")->required();
  solve->add_option("--trace", trace, "Override the trace output path");
  solve->add_option("--report", report, "Override the diagnostics report path");

  std::string dir;
  std::string out;
  CLI::App* bench = app.add_subcommand("bench", "Run every config in a directory");
  bench->add_option("--dir", dir, "Directory of *.json configs")->required();
  bench->add_option("--out", out, "Summary CSV path")->required();

  CLI::App* check = app.add_subcommand("check", "Diagnostics on a saved solution");
  check->add_option("--config", config, "Run configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : scvx::cli::kExitParseError;
  }

  if (*solve) {
    std::optional<std::string> t, r;
    if (!trace.empty()) t = trace;
    if (!report.empty()) r = report;
    return scvx::cli::solve(config, t, r, std::cerr);
  }
  if (*bench) return scvx::cli::bench(dir, out, std::cerr);
  return scvx::cli::check(config, std::cerr);
}
