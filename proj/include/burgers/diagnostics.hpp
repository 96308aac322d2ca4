#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "burgers/brownian.hpp"
#include "burgers/interpolation.hpp"
#include "burgers/picard.hpp"
#include "burgers/sde_engine.hpp"
#include "burgers/torus_field.hpp"

namespace burgers {

/// Outcome of one numerical check. MC checks carry a standard error and
/// report their statistic in standard-error units.
struct CheckReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::optional<double> standard_error;
  bool pass = false;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json to_json(const CheckReport& report);
nlohmann::json to_json(std::span<const CheckReport> reports);
/// Fixed-width table, one row per check.
void print_table(std::ostream& os, std::span<const CheckReport> reports);
bool all_pass(std::span<const CheckReport> reports) noexcept;

struct PdeResidual {
  /// ‖∂_s y + (y·∇)y + νΔy + F‖_{L2} per time slice.
  std::vector<double> per_time;
  double max = 0.0;
  double terminal_mismatch = 0.0;
  CheckReport residual;
  CheckReport terminal;
};

/// ∂_s y by centered differences (one-sided second order at the ends), the
/// spatial terms spectrally. y(T) ≠ h is reported as a separate check.
PdeResidual pde_residual(const SpaceTimeField& y, const PeriodicField& terminal,
                         const SpaceTimeField& forcing, double nu, double threshold = 1e-5,
                         double terminal_tolerance = 1e-12, bool dealias = true);

struct FlowConsistencyOptions {
  /// Common-noise characteristics launched from (t, probe).
  std::size_t outer_paths = 1;
  std::uint64_t seed = 1;
  /// Fresh estimates restarted at (u, Z_u); mode must be independent.
  McConfig restart{10000, 2, NoiseMode::independent, false};
  /// Standard error of y itself (e.g. PicardState::standard_error), if known.
  std::optional<SpaceTimeField> field_standard_error;
  double confidence = 3.0;
};

/// Compares y(u, Z_u^{t,θ}) with a restarted estimate of
/// E[h(Z_T) + Σ_{r >= u} F Δr | Z_u] for every outer path and probe; the
/// statistic is the largest discrepancy in combined standard errors. t and u
/// must be nodes of y's time grid.
CheckReport flow_consistency(const SpaceTimeField& y, const PeriodicField& terminal,
                             const SpaceTimeField& forcing, double nu, double t, double u,
                             std::span<const double> probes, const FlowConsistencyOptions& options);

/// Periodic displacement δ with ξ(θ) = θ + δ(θ). Throws InvalidInput if the
/// grid Jacobian det(I + ∇δ) is not positive at every node.
void require_diffeomorphism(const PeriodicField& displacement);

/// Common-noise characteristics from ξ(θ_i) against the flow from the grid
/// composed with ξ, Z^{t,e}_s(ξ(θ_i)) through `kind` interpolation of the
/// flow's displacement. Statistic: max over steps and paths of the
/// normalized L2 difference over nodes.
CheckReport composition_law(const SpaceTimeField& y, const PeriodicField& xi_displacement, double nu,
                            double t, std::size_t paths, std::uint64_t seed, double threshold = 1e-3,
                            Interpolation kind = Interpolation::cubic_spline);

struct BsdeResidual {
  double rms = 0.0;
  /// RMS over paths and starts at each step of the ensemble.
  std::vector<double> rms_per_time;
  CheckReport residual;
  /// Mean of y(s, Z_s) + Σ_{r<s} F Δr at the horizon minus its start value,
  /// in standard errors over paths.
  CheckReport martingale;
};

/// Per path and step: y(s, Z_s) - [h(Z_T) + Σ F Δr - sqrt(2ν) Σ X ΔW], with
/// X sampled along `chars` by martingale_integrand and `noise` the increments
/// that drove `chars`.
BsdeResidual bsde_residual(const SpaceTimeField& y, const MatrixPathEnsemble& x,
                           const CharacteristicEnsemble& chars, const BrownianEnsemble& noise,
                           const PeriodicField& terminal, const SpaceTimeField& forcing, double nu,
                           double threshold = 0.1);

/// Samples common-noise characteristics from every grid node at t = t_0,
/// the integrand X = ∇y∘Z, and runs bsde_residual.
BsdeResidual bsde_residual_study(const SpaceTimeField& y, const PeriodicField& terminal,
                                 const SpaceTimeField& forcing, double nu, std::size_t paths,
                                 std::uint64_t seed, double threshold = 0.1);

struct DeterminismStudy {
  std::vector<std::size_t> paths;
  /// Across-seed variance of the estimator, averaged over probes.
  std::vector<double> variance;
  std::optional<double> slope;
  bool exact = false;
  CheckReport report;
};

/// Estimates y(t, probe) by Feynman-Kac restarts under `drift` for every
/// (M, seed) and fits log variance against log M. Zero variances are left
/// out of the fit; if all vanish the estimator is reported as exact.
DeterminismStudy determinism_check(const SpaceTimeField& drift, const PeriodicField& terminal,
                                   const SpaceTimeField& forcing, double nu, double t,
                                   std::span<const double> probes,
                                   std::span<const std::size_t> path_counts,
                                   std::span<const std::uint64_t> seeds);

/// Running summaries of the flow's regularity; add() may be called batch by
/// batch.
class FlowRegularity {
 public:
  FlowRegularity(std::vector<double> p_values, std::size_t steps);

  /// Positivity needs a 1-D ensemble started from consecutive points of a
  /// full circle (the grid); moments work in any dimension.
  void add(const CharacteristicEnsemble& chars, const TangentEnsemble& tangent);

  std::size_t total_paths() const noexcept { return total_; }
  std::size_t positive_paths() const noexcept { return positive_; }
  double positive_fraction() const noexcept;
  const std::vector<double>& p_values() const noexcept { return p_; }
  /// E‖∇Z_s‖^p_{L_p} per step for p_values()[k].
  std::vector<double> moments(std::size_t k) const;

  CheckReport report(double threshold = 0.999) const;

 private:
  std::vector<double> p_;
  std::size_t steps_;
  std::size_t total_ = 0;
  std::size_t positive_ = 0;
  bool positivity_checked_ = false;
  std::vector<double> sums_;  // [p][step]
  std::size_t samples_ = 0;
};

/// Common-noise flow from every grid node at t, processed in batches.
FlowRegularity flow_regularity_study(const SpaceTimeField& drift, double nu, double t,
                                     std::size_t paths, std::uint64_t seed,
                                     std::vector<double> p_values, std::size_t batch = 256);

/// 1-D: ∂_θ Z from the tangent flow against centered differences of the
/// common-noise flow across neighbouring grid starts; statistic is the max
/// relative difference.
CheckReport tangent_consistency(const CharacteristicEnsemble& chars, const TangentEnsemble& tangent,
                                double threshold = 1e-2);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace burgers
