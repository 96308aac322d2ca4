#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "burgers/brownian.hpp"
#include "burgers/budget.hpp"
#include "burgers/interpolation.hpp"
#include "burgers/sde_engine.hpp"
#include "burgers/torus_field.hpp"

namespace burgers {

struct McConfig {
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  NoiseMode mode = NoiseMode::independent;
  bool antithetic = false;

  friend bool operator==(const McConfig&, const McConfig&) = default;
};

struct PicardOptions {
  double tol = 5e-3;
  int max_iter = 8;
  /// Full restarts to the horizon run from every c-th time slice only; the
  /// slices in between are filled backwards through the one-step flow
  /// identity y(t_j) = E[y(t_{j+1}, Z_{j+1})] + F Δt. c = 1 restarts everywhere.
  int restart_stride = 1;
};

/// Monte Carlo estimates of E[g(Z_{t_a}) + Σ_{t_j <= t_l < t_a} F(t_l, Z_l) Δt_l]
/// for Euler characteristics of `drift` started at (t_j, point). Path m uses
/// the noise stream noise_stream(m, restart_id, restart_count, ...), indexed
/// by the absolute time step, so equal ids give equal noise.
class FeynmanKacSampler {
 public:
  /// `forcing` must share the drift's time and space grids.
  FeynmanKacSampler(const SpaceTimeField& drift, const SpaceTimeField& forcing, const McConfig& mc,
                    double nu);

  /// Writes the per-component mean and standard error (over antithetic pair
  /// means when enabled). Throws SolverError if the mean is not finite.
  void estimate(std::size_t start, std::size_t anchor, std::span<const double> point,
                const FieldInterpolator& anchor_field, std::uint64_t restart_id,
                std::uint64_t restart_count, std::span<double> mean, std::span<double> se) const;

  /// Same with anchor = start + 1, but path m takes its increment from
  /// normal index m (times dim) of the single stream `step_stream`, so one
  /// Philox block serves four paths.
  void estimate_step(std::size_t start, std::span<const double> point, const FieldInterpolator& next,
                     std::uint64_t step_stream, std::span<double> mean, std::span<double> se) const;

 private:
  std::vector<double> times_;
  int dim_;
  McConfig mc_;
  double sigma_;
  bool has_forcing_;
  std::vector<FieldInterpolator> drift_;
  std::vector<FieldInterpolator> forcing_;
  std::vector<double> sqrt_dt_;
};

/// One application of the contraction map: the new field and the Monte
/// Carlo standard error of every estimated node (zero on the terminal slice;
/// on filled slices the next slice's error is added in quadrature).
struct GammaResult {
  SpaceTimeField value;
  SpaceTimeField standard_error;
};

/// Copies `forcing` onto `times` by linear interpolation in time (slices are
/// reused bitwise where the grids share a node).
SpaceTimeField resample_in_time(const SpaceTimeField& forcing, std::span<const double> times);

/// y_{k+1}(t_j, θ_i) = mean over M characteristics of h(Z_T) + Σ_r F(r, Z_r) Δr,
/// with Z driven by `drift` from (t_j, θ_i); see PicardOptions for the
/// restart stride. Noise is keyed on (seed, t_j, θ_i, path) and not on the
/// iteration, so repeated applications share random numbers. Terminal slice
/// is h exactly.
GammaResult gamma_map(const SpaceTimeField& drift, const PeriodicField& terminal,
                      const SpaceTimeField& forcing, const McConfig& mc, double nu,
                      int restart_stride = 1);

struct PicardState {
  SpaceTimeField iterate;
  SpaceTimeField standard_error;
  int k = 0;
  std::vector<double> diff_history;
  McConfig mc;
  bool converged = false;
  std::vector<double> iteration_seconds;
  std::vector<std::string> warnings;
};

struct PicardResult {
  SpaceTimeField solution;
  PicardState state;
  ContractionBudget budget;
};

/// Fixed-point iteration of gamma_map from y ≡ 0 until the sup-grid change
/// drops below tol or max_iter is reached. Throws SolverError on divergence.
PicardResult picard_solve(const PeriodicField& terminal, const SpaceTimeField& forcing, double nu,
                          std::span<const double> times, const McConfig& mc,
                          const PicardOptions& options);

/// X_s(θ) = ∇y(s, ·) ∘ Z_s(θ): the gradient field of y and its evaluation
/// along characteristics.
class MartingaleIntegrandField {
 public:
  explicit MartingaleIntegrandField(const SpaceTimeField& y);

  const SpaceTimeField& gradient() const noexcept { return gradient_; }
  /// X at time-grid index j and point z (dim*dim values, row-major).
  void evaluate(std::size_t j, std::span<const double> point, std::span<double> out) const;

 private:
  SpaceTimeField gradient_;
  std::vector<FieldInterpolator> slices_;
};

/// X sampled at every (path, start, step) of `chars`.
MatrixPathEnsemble martingale_integrand(const SpaceTimeField& y, const CharacteristicEnsemble& chars,
                                        double nu);

}  // namespace burgers
