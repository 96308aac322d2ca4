#pragma once

#include <optional>
#include <span>

#include "burgers/torus_field.hpp"

namespace burgers {

/// Solvability certificate of the Picard map: with K the Lipschitz budget,
/// γ(T) = T e^T K is its contraction factor and T0 solves T0 e^T0 K = 1.
struct ContractionBudget {
  double lipschitz = 0.0;
  double horizon = 0.0;
  double gamma = 0.0;
  /// Empty when K = 0 (every horizon contracts).
  std::optional<double> t0;

  bool contracts() const noexcept { return gamma < 1.0; }
};

/// Largest singular value of a dim × dim row-major matrix.
double operator_norm(std::span<const double> matrix, int dim);

/// K = sup_θ |∇h| + sup_{s,θ} |∇F| over grid nodes and forcing time slices,
/// with spectral gradients and the operator norm.
double lipschitz_budget(const PeriodicField& terminal, const SpaceTimeField& forcing);

/// Positive root of T e^T K = 1 by bisection to 1e-12; empty for K = 0.
std::optional<double> horizon_bound(double lipschitz);

ContractionBudget contraction_budget(double lipschitz, double horizon);

}  // namespace burgers
