#pragma once

#include <vector>

#include "burgers/torus_field.hpp"

namespace burgers {

struct OracleConfig {
  GridSpec grid{1, 128};
  double nu = 0.1;
  double horizon = 0.5;
  /// Requested RK4 step; the step actually taken divides each output
  /// interval evenly and is never larger.
  double dt = 1e-3;
  bool dealias = true;
  /// Output slices over [0, T]; 0 means round(T / dt).
  int output_steps = 0;
};

struct OracleSolution {
  SpaceTimeField field;
  /// ‖y(s_j)‖_{L2} on the output grid.
  std::vector<double> energy;
  /// Energy nondecreasing in s. Only meaningful without forcing.
  bool energy_monotone = true;
  double step = 0.0;
  int substeps = 0;
};

/// Pseudo-spectral RK4 for ∂_s y + (y·∇)y + νΔy + F = 0, y(T) = h, marched
/// in τ = T - s. `forcing` is sampled linearly in time at the stage times and
/// must cover [0, T]. Throws InvalidInput if the step breaks the RK4
/// stability region and SolverError if the state stops being finite.
OracleSolution solve_backward_burgers(const PeriodicField& terminal, const SpaceTimeField& forcing,
                                      const OracleConfig& config);

/// Unforced classical 1-D Burgers ∂_t u + u u' = ν u'' from zero-mean u0,
/// through u = -2ν (log φ)' with the heat flow applied mode by mode.
PeriodicField cole_hopf_solution(const PeriodicField& u0, double nu, double t);

/// v(s) = -u(T - s). Also maps a backward forcing F to the classical-side
/// force -F(T - ·) and back. Applying it twice returns the input bitwise.
SpaceTimeField time_reversal(const SpaceTimeField& u, double horizon);

/// L2 norm per time of ∂_t u + (u·∇)u - νΔu - G for a classical-side field.
std::vector<double> classical_residual(const SpaceTimeField& u, const SpaceTimeField& force,
                                       double nu, bool dealias = true);

}  // namespace burgers
