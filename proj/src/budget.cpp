#include "burgers/budget.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "burgers/error.hpp"
#include "burgers/spectral.hpp"

namespace burgers {

double operator_norm(std::span<const double> matrix, int dim) {
  if (dim == 1) return std::abs(matrix[0]);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      matrix.data(), dim, dim);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

namespace {

double sup_gradient_norm(const PeriodicField& field) {
  const int dim = field.grid().dim();
  if (field.components() != dim) throw InvalidInput("lipschitz_budget: expected a velocity field");
  const auto grad = spectral_gradient(field);
  double sup = 0.0;
  std::vector<double> jac(static_cast<std::size_t>(dim) * dim);
  for (std::size_t node = 0; node < field.node_count(); ++node) {
    for (int c = 0; c < dim * dim; ++c) jac[c] = grad.at(c, node);
    sup = std::max(sup, operator_norm(jac, dim));
  }
  return sup;
}

}  // namespace

double lipschitz_budget(const PeriodicField& terminal, const SpaceTimeField& forcing) {
  double forcing_sup = 0.0;
  for (const auto& slice : forcing.slices()) forcing_sup = std::max(forcing_sup, sup_gradient_norm(slice));
  return sup_gradient_norm(terminal) + forcing_sup;
}

std::optional<double> horizon_bound(double lipschitz) {
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) {
    throw InvalidInput("horizon_bound: Lipschitz budget must be a finite nonnegative real");
  }
  if (lipschitz == 0.0) return std::nullopt;
  const double target = 1.0 / lipschitz;
  double lo = 0.0;
  double hi = 1.0;
  while (hi * std::exp(hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mid * std::exp(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ContractionBudget contraction_budget(double lipschitz, double horizon) {
  if (!(horizon > 0.0)) throw InvalidInput("contraction_budget: horizon must be positive");
  return {lipschitz, horizon, horizon * std::exp(horizon) * lipschitz, horizon_bound(lipschitz)};
}

}  // namespace burgers
