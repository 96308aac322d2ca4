#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "burgers/spectral.hpp"
#include "burgers/torus_field.hpp"

namespace burgers {

namespace detail {

struct AxisLocation {
  int index;
  double t;
};

/// Cell index in [0, n) and local coordinate t in [0, 1) of x on a periodic
/// axis; points within a few ulps of a node snap onto it with t = 0.
inline AxisLocation locate(double x, double inv_spacing, int n) noexcept {
  const double u = x * inv_spacing;
  long long i = static_cast<long long>(u);
  if (static_cast<double>(i) > u) --i;
  double t = u - static_cast<double>(i);
  const double tol = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u));
  if (t <= tol) {
    t = 0.0;
  } else if (1.0 - t <= tol) {
    ++i;
    t = 0.0;
  }
  if (i < 0 || i >= n) [[unlikely]] {
    i %= n;
    if (i < 0) i += n;
  }
  return {static_cast<int>(i), t};
}

}  // namespace detail

enum class Interpolation {
  /// Band-limited trigonometric interpolant; spectrally exact, O(N^n) per point.
  trigonometric,
  /// Tensor-product periodic cubic spline; O(4^n) per point.
  cubic_spline,
};

/// Evaluates a PeriodicField at arbitrary (unwrapped) points of R^n, treating
/// the field as 2π-periodic. Both backends return stored node values bitwise
/// when a point lands on a node, and the spline backend reproduces constant
/// fields exactly.
class FieldInterpolator {
 public:
  explicit FieldInterpolator(const PeriodicField& field,
                             Interpolation kind = Interpolation::cubic_spline);

  int dim() const noexcept { return grid_.dim(); }
  int components() const noexcept { return components_; }
  const GridSpec& grid() const noexcept { return grid_; }
  Interpolation kind() const noexcept { return kind_; }

  /// out[c] = f_c(point) for all components.
  void evaluate(std::span<const double> point, std::span<double> out) const;
  /// Scalar fast path for dim == 1.
  double evaluate_1d(double x, int component = 0) const noexcept {
    const int n = grid_.points_per_axis();
    const auto [i, t] = detail::locate(x, inv_spacing_, n);
    if (kind_ == Interpolation::trigonometric) [[unlikely]] {
      if (t == 0.0) return values_[static_cast<std::size_t>(component) * n + i];
      return evaluate_1d_trig(x, component);
    }
    const double* cell = cells_.data() + (static_cast<std::size_t>(component) * n + i) * 4;
    if (t == 0.0) return cell[0];
    return cell[0] + t * (cell[1] + t * (cell[2] + t * cell[3]));
  }

 private:
  void evaluate_spline(std::span<const double> point, std::span<double> out) const;
  void evaluate_trig(std::span<const double> point, std::span<double> out) const;
  void build_cells();
  double evaluate_1d_trig(double x, int component) const;

  GridSpec grid_;
  int components_;
  Interpolation kind_;
  double inv_spacing_;
  double spline_h2_;
  std::vector<double> values_;
  // Spline: one table per subset S of axes holding the mixed second-derivative
  // moments (∏_{a∈S} M_a) f; tables_[0] is the field itself.
  std::vector<std::vector<double>> tables_;
  // 1-D spline only: four power-form coefficients per cell and component.
  std::vector<double> cells_;
  std::vector<SpectralCoeffs> coeffs_;
};

/// Field values at `positions` (count × dim, unwrapped allowed); returns
/// count × components values, point-major.
std::vector<double> compose(const PeriodicField& field, std::span<const double> positions,
                            Interpolation kind = Interpolation::cubic_spline);

/// Per-slice interpolators of a SpaceTimeField with linear interpolation in
/// time between adjacent slices.
class SpaceTimeInterpolator {
 public:
  explicit SpaceTimeInterpolator(const SpaceTimeField& field,
                                 Interpolation kind = Interpolation::cubic_spline);

  const std::vector<double>& times() const noexcept { return times_; }
  const FieldInterpolator& slice(std::size_t j) const noexcept { return slices_[j]; }
  int components() const noexcept { return slices_.front().components(); }
  int dim() const noexcept { return slices_.front().dim(); }

  /// Value at time s (must lie in [t0, T]) and point.
  void evaluate(double s, std::span<const double> point, std::span<double> out) const;

 private:
  std::vector<double> times_;
  std::vector<FieldInterpolator> slices_;
};

/// y(s, positions) for t0 <= s <= T: linear in time, then compose in space.
std::vector<double> eval_spacetime(const SpaceTimeField& field, double s,
                                   std::span<const double> positions,
                                   Interpolation kind = Interpolation::cubic_spline);

}  // namespace burgers
