#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "burgers/burgers_oracle.hpp"
#include "burgers/budget.hpp"
#include "burgers/config.hpp"
#include "burgers/diagnostics.hpp"
#include "burgers/picard.hpp"

namespace burgers {

struct RunOptions {
  /// Output directory; empty means config.outputs.directory.
  std::filesystem::path out;
  /// Directory that relative tabulated files resolve against.
  std::filesystem::path base;
  /// Human-readable progress, budget and tables; null silences them.
  std::ostream* log = nullptr;
  /// Set false to skip all file output (used by tests).
  bool write = true;
};

/// Inputs realized on the configured grid. The forcing presets are time
/// independent and are held constant on the Picard time grid.
struct Problem {
  GridSpec grid;
  std::vector<double> times;
  PeriodicField terminal;
  SpaceTimeField forcing;
};

Problem make_problem(const ExperimentConfig& config, const std::filesystem::path& base = {});
OracleConfig oracle_config(const ExperimentConfig& config);
McConfig mc_config(const ExperimentConfig& config);

/// K, γ(T), T0 for the configured problem.
ContractionBudget problem_budget(const ExperimentConfig& config, const std::filesystem::path& base = {});
void print_budget(std::ostream& os, const ContractionBudget& budget);

struct SolveOutcome {
  PicardResult picard;
  std::vector<CheckReport> diagnostics;
  bool diagnostics_pass = true;
};

/// Runs the configured diagnostics (all of them when the list is empty)
/// against a Picard solution.
std::vector<CheckReport> run_diagnostic_suite(const ExperimentConfig& config, const Problem& problem,
                                              const PicardResult& picard);

SolveOutcome run_solve(const ExperimentConfig& config, const RunOptions& options);
/// run_solve with diagnostics forced on.
SolveOutcome run_diagnose(const ExperimentConfig& config, const RunOptions& options);
OracleSolution run_oracle(const ExperimentConfig& config, const RunOptions& options);

struct CompareOutcome {
  std::vector<double> times;
  std::vector<double> l2;
  std::vector<double> linf;
  /// ‖y(0) - y_oracle(0)‖ / ‖y_oracle(0)‖, or the absolute error when the
  /// oracle vanishes.
  double relative_l2 = 0.0;
  PicardResult picard;
  OracleSolution oracle;
};

CompareOutcome run_compare(const ExperimentConfig& config, const RunOptions& options);

struct ConvergenceOutcome {
  std::string parameter;
  std::vector<double> values;
  std::vector<double> errors;
  double slope = 0.0;
};

/// M and N sweeps repeat run_compare with the base seed; a dt sweep runs the
/// oracle alone against a reference at a quarter of the smallest dt, and its
/// slope is fitted against 1/dt.
/// Needs at least 3 sweep values (ConfigError otherwise).
ConvergenceOutcome run_convergence(const ExperimentConfig& config, const RunOptions& options);

}  // namespace burgers
