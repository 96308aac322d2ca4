#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "burgers/brownian.hpp"
#include "burgers/torus_field.hpp"

namespace burgers {

struct SineTerm {
  double amplitude = 0.0;
  int wavenumber = 1;
  int axis = 0;
  int component = 0;

  friend bool operator==(const SineTerm&, const SineTerm&) = default;
};

/// A named function preset: zero, constant (value per component), sine
/// (one term), sine_sum (several terms) or tabulated (snapshot CSV on the
/// run's grid).
struct FunctionSpec {
  std::string preset = "zero";
  std::vector<double> values;
  std::vector<SineTerm> terms;
  std::string file;

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

struct ProblemConfig {
  int dim = 1;
  double nu = 0.1;
  double horizon = 0.5;
  /// Sobolev index; only used for the regularity warning and norms.
  double alpha = 3.0;
  FunctionSpec terminal;
  FunctionSpec forcing;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct GridConfig {
  int points_per_axis = 128;
  int time_steps = 128;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct McSection {
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  NoiseMode mode = NoiseMode::independent;
  bool antithetic = false;

  friend bool operator==(const McSection&, const McSection&) = default;
};

struct PicardSection {
  double tol = 5e-3;
  int max_iter = 8;
  int restart_stride = 1;

  friend bool operator==(const PicardSection&, const PicardSection&) = default;
};

struct OracleSection {
  double dt = 1e-3;
  bool dealias = true;

  friend bool operator==(const OracleSection&, const OracleSection&) = default;
};

struct DiagnosticsSection {
  bool enabled = false;
  /// Subset of: pde_residual, flow_consistency, composition_law,
  /// bsde_residual, determinism, flow_regularity, tangent_flow.
  std::vector<std::string> checks;
  std::vector<double> probes;
  /// Probe time for the flow identity, as a time-grid index.
  int probe_step = 0;
  std::size_t restart_paths = 10000;
  std::size_t outer_paths = 1;
  std::size_t bsde_paths = 64;
  std::size_t flow_paths = 1000;
  std::vector<std::size_t> determinism_paths{1000, 4000, 16000};
  std::size_t determinism_seeds = 16;
  std::vector<double> moment_orders{2.0, 4.0};
  double pde_threshold = 1e-5;
  double bsde_threshold = 0.1;
  double composition_threshold = 1e-3;

  friend bool operator==(const DiagnosticsSection&, const DiagnosticsSection&) = default;
};

struct SweepSection {
  /// "M", "dt" or "N"; empty when no sweep is configured.
  std::string parameter;
  std::vector<double> values;

  friend bool operator==(const SweepSection&, const SweepSection&) = default;
};

struct OutputSection {
  std::string directory = "runs/default";
  /// Any of: json, csv, binary.
  std::vector<std::string> formats{"json", "csv"};

  friend bool operator==(const OutputSection&, const OutputSection&) = default;
};

struct ExperimentConfig {
  ProblemConfig problem;
  GridConfig grid;
  McSection mc;
  PicardSection picard;
  OracleSection oracle;
  DiagnosticsSection diagnostics;
  SweepSection sweep;
  OutputSection outputs;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the key path (e.g. "problem.h.amplitude").
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Samples a preset on the grid as a velocity field (dim components).
/// Relative tabulated paths resolve against `base`.
PeriodicField realize(const FunctionSpec& spec, const GridSpec& grid,
                      const std::filesystem::path& base = {});

}  // namespace burgers
