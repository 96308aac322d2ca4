#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace burgers {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Largest torus dimension supported by the interpolation and I/O layers.
inline constexpr int kMaxDim = 3;

/// Uniform grid on the n-torus [0, 2π)^n with N points per axis. Nodes are
/// stored row-major, axis 0 slowest.
class GridSpec {
 public:
  GridSpec(int dim, int points_per_axis);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return points_; }
  std::size_t node_count() const noexcept { return nodes_; }
  double spacing() const noexcept { return kTwoPi / points_; }
  double coordinate(int j) const noexcept { return j * spacing(); }

  std::array<int, kMaxDim> node_index(std::size_t flat) const noexcept;
  std::size_t flat_index(std::span<const int> index) const noexcept;
  /// Writes the coordinates of node `flat` into out[0..dim).
  void node_point(std::size_t flat, std::span<double> out) const noexcept;
  /// The identity map e sampled at the nodes: node_count() points, dim each.
  std::vector<double> identity_points() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int dim_;
  int points_;
  std::size_t nodes_;
};

/// A real field on the torus with `components` values per node. Storage is
/// component-major: values[c * node_count + node].
class PeriodicField {
 public:
  PeriodicField(GridSpec grid, int components);
  PeriodicField(GridSpec grid, int components, std::vector<double> values);

  using PointFunction = std::function<void(std::span<const double> theta, std::span<double> out)>;
  static PeriodicField from_function(GridSpec grid, int components, const PointFunction& fn);
  static PeriodicField constant(GridSpec grid, std::span<const double> value);

  const GridSpec& grid() const noexcept { return grid_; }
  int components() const noexcept { return components_; }
  std::size_t node_count() const noexcept { return grid_.node_count(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> component(int c) const noexcept;
  std::span<double> component(int c) noexcept;
  double at(int c, std::size_t node) const noexcept { return values_[c * node_count() + node]; }
  double& at(int c, std::size_t node) noexcept { return values_[c * node_count() + node]; }

  bool all_finite() const noexcept;
  /// Throws InvalidInput naming `what` and the first bad node.
  void require_finite(std::string_view what) const;
  double sup_abs() const noexcept;

  friend bool operator==(const PeriodicField&, const PeriodicField&) = default;

 private:
  GridSpec grid_;
  int components_;
  std::vector<double> values_;
};

/// A sequence of field slices on a strictly increasing time grid ending at
/// the horizon T. All slices share one grid and component count.
class SpaceTimeField {
 public:
  SpaceTimeField(std::vector<double> times, std::vector<PeriodicField> slices);
  /// Same slice at every time of `times`.
  static SpaceTimeField constant_in_time(std::vector<double> times, const PeriodicField& slice);

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<PeriodicField>& slices() const noexcept { return slices_; }
  const PeriodicField& slice(std::size_t j) const noexcept { return slices_[j]; }
  PeriodicField& slice(std::size_t j) noexcept { return slices_[j]; }
  std::size_t slice_count() const noexcept { return slices_.size(); }
  std::size_t step_count() const noexcept { return slices_.size() - 1; }
  double start_time() const noexcept { return times_.front(); }
  double horizon() const noexcept { return times_.back(); }
  const GridSpec& grid() const noexcept { return slices_.front().grid(); }
  int components() const noexcept { return slices_.front().components(); }

  void require_finite(std::string_view what) const;
  double sup_abs() const noexcept;
  /// Index j with times()[j] == s exactly, or -1.
  std::ptrdiff_t time_index(double s) const noexcept;
  bool is_uniform(double relative_tolerance = 1e-10) const noexcept;

  friend bool operator==(const SpaceTimeField&, const SpaceTimeField&) = default;

 private:
  std::vector<double> times_;
  std::vector<PeriodicField> slices_;
};

/// t0 + j (T - t0) / steps for j = 0..steps, with the last entry exactly T.
std::vector<double> uniform_times(double t0, double horizon, int steps);

/// Throws InvalidInput unless the grid has at least one step and is strictly
/// increasing with finite entries.
void validate_time_grid(std::span<const double> times);

/// The field at time s by linear interpolation between the bracketing
/// slices; a slice is returned as is when s is one of the grid times.
PeriodicField slice_at(const SpaceTimeField& field, double s);

/// ∂_s of a field on a uniform time grid: centered differences inside,
/// second-order one-sided stencils at both ends. Needs at least 3 slices.
SpaceTimeField time_derivative(const SpaceTimeField& field);

/// Normalized L2 norm sqrt((2π)^-n ∫ |f|^2) by grid quadrature, all components.
double l2_norm(const PeriodicField& f);
double l2_distance(const PeriodicField& a, const PeriodicField& b);
double sup_distance(const PeriodicField& a, const PeriodicField& b);
double sup_distance(const SpaceTimeField& a, const SpaceTimeField& b);

/// Order-sensitive 64-bit fingerprint of a field's bits (grid, times, values).
std::uint64_t fingerprint(const SpaceTimeField& field) noexcept;
std::uint64_t fingerprint(std::span<const double> data, std::uint64_t seed = 1469598103934665603ULL) noexcept;

}  // namespace burgers
