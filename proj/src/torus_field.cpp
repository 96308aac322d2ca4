#include "burgers/torus_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <string>

#include "burgers/error.hpp"

namespace burgers {

GridSpec::GridSpec(int dim, int points_per_axis) : dim_(dim), points_(points_per_axis), nodes_(1) {
  if (dim < 1 || dim > kMaxDim) {
    throw InvalidInput("grid dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                       std::to_string(dim));
  }
  if (points_per_axis < 8 || points_per_axis % 2 != 0) {
    throw InvalidInput("points per axis must be even and >= 8, got " +
                       std::to_string(points_per_axis));
  }
  for (int a = 0; a < dim; ++a) nodes_ *= static_cast<std::size_t>(points_per_axis);
}

std::array<int, kMaxDim> GridSpec::node_index(std::size_t flat) const noexcept {
  std::array<int, kMaxDim> index{};
  for (int a = dim_ - 1; a >= 0; --a) {
    index[a] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return index;
}

std::size_t GridSpec::flat_index(std::span<const int> index) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * points_ + static_cast<std::size_t>(index[a]);
  return flat;
}

void GridSpec::node_point(std::size_t flat, std::span<double> out) const noexcept {
  const auto index = node_index(flat);
  for (int a = 0; a < dim_; ++a) out[a] = coordinate(index[a]);
}

std::vector<double> GridSpec::identity_points() const {
  std::vector<double> points(nodes_ * dim_);
  for (std::size_t i = 0; i < nodes_; ++i) node_point(i, std::span(points).subspan(i * dim_, dim_));
  return points;
}

PeriodicField::PeriodicField(GridSpec grid, int components)
    : grid_(grid), components_(components) {
  if (components < 1) throw InvalidInput("field needs at least one component");
  values_.assign(grid_.node_count() * components, 0.0);
}

PeriodicField::PeriodicField(GridSpec grid, int components, std::vector<double> values)
    : grid_(grid), components_(components), values_(std::move(values)) {
  if (components < 1) throw InvalidInput("field needs at least one component");
  if (values_.size() != grid_.node_count() * components) {
    std::ostringstream msg;
    msg << "field value array has " << values_.size() << " entries, expected "
        << grid_.node_count() * components;
    throw InvalidInput(msg.str());
  }
}

PeriodicField PeriodicField::from_function(GridSpec grid, int components, const PointFunction& fn) {
  PeriodicField field(grid, components);
  std::array<double, kMaxDim> theta{};
  std::vector<double> out(components);
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    grid.node_point(i, theta);
    fn(std::span<const double>(theta.data(), grid.dim()), out);
    for (int c = 0; c < components; ++c) field.at(c, i) = out[c];
  }
  return field;
}

PeriodicField PeriodicField::constant(GridSpec grid, std::span<const double> value) {
  PeriodicField field(grid, static_cast<int>(value.size()));
  for (int c = 0; c < field.components(); ++c) std::ranges::fill(field.component(c), value[c]);
  return field;
}

std::span<const double> PeriodicField::component(int c) const noexcept {
  return std::span(values_).subspan(c * node_count(), node_count());
}

std::span<double> PeriodicField::component(int c) noexcept {
  return std::span(values_).subspan(c * node_count(), node_count());
}

bool PeriodicField::all_finite() const noexcept {
  return std::ranges::all_of(values_, [](double v) { return std::isfinite(v); });
}

void PeriodicField::require_finite(std::string_view what) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      std::ostringstream msg;
      msg << what << ": non-finite value " << values_[k] << " at component "
          << k / node_count() << ", node " << k % node_count();
      throw InvalidInput(msg.str());
    }
  }
}

double PeriodicField::sup_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SpaceTimeField::SpaceTimeField(std::vector<double> times, std::vector<PeriodicField> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  validate_time_grid(times_);
  if (slices_.size() != times_.size()) {
    throw InvalidInput("space-time field has " + std::to_string(slices_.size()) +
                       " slices for " + std::to_string(times_.size()) + " times");
  }
  for (const auto& s : slices_) {
    if (s.grid() != slices_.front().grid() || s.components() != slices_.front().components()) {
      throw InvalidInput("space-time field slices must share one grid and component count");
    }
  }
}

SpaceTimeField SpaceTimeField::constant_in_time(std::vector<double> times,
                                                const PeriodicField& slice) {
  std::vector<PeriodicField> slices(times.size(), slice);
  return SpaceTimeField(std::move(times), std::move(slices));
}

void SpaceTimeField::require_finite(std::string_view what) const {
  for (std::size_t j = 0; j < slices_.size(); ++j) {
    if (!slices_[j].all_finite()) {
      slices_[j].require_finite(std::string(what) + " (time index " + std::to_string(j) + ")");
    }
  }
}

double SpaceTimeField::sup_abs() const noexcept {
  double m = 0.0;
  for (const auto& s : slices_) m = std::max(m, s.sup_abs());
  return m;
}

std::ptrdiff_t SpaceTimeField::time_index(double s) const noexcept {
  const auto it = std::lower_bound(times_.begin(), times_.end(), s);
  if (it == times_.end() || *it != s) return -1;
  return it - times_.begin();
}

bool SpaceTimeField::is_uniform(double relative_tolerance) const noexcept {
  const double dt = (times_.back() - times_.front()) / static_cast<double>(step_count());
  for (std::size_t j = 0; j + 1 < times_.size(); ++j) {
    if (std::abs(times_[j + 1] - times_[j] - dt) > relative_tolerance * dt) return false;
  }
  return true;
}

std::vector<double> uniform_times(double t0, double horizon, int steps) {
  if (steps < 1) throw InvalidInput("time grid needs at least one step");
  if (!(horizon > t0)) throw InvalidInput("time grid horizon must exceed its start");
  std::vector<double> times(steps + 1);
  for (int j = 0; j <= steps; ++j) times[j] = t0 + (horizon - t0) * j / steps;
  times.back() = horizon;
  return times;
}

void validate_time_grid(std::span<const double> times) {
  if (times.size() < 2) throw InvalidInput("time grid must contain at least one step");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!std::isfinite(times[j])) throw InvalidInput("time grid contains a non-finite entry");
    if (j > 0 && !(times[j] > times[j - 1])) {
      throw InvalidInput("time grid must be strictly increasing (index " + std::to_string(j) + ")");
    }
  }
}

PeriodicField slice_at(const SpaceTimeField& field, double s) {
  const auto& ft = field.times();
  if (!(s >= ft.front() && s <= ft.back())) {
    throw InvalidInput("time " + std::to_string(s) + " outside the field's time range");
  }
  const auto it = std::upper_bound(ft.begin(), ft.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - ft.begin()) - 1;
  if (ft[j] == s || j + 1 == ft.size()) return field.slice(j);
  const double w = (s - ft[j]) / (ft[j + 1] - ft[j]);
  PeriodicField f = field.slice(j);
  const auto upper = field.slice(j + 1).values();
  auto v = f.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += w * (upper[k] - v[k]);
  return f;
}

SpaceTimeField time_derivative(const SpaceTimeField& field) {
  const std::size_t count = field.slice_count();
  if (count < 3) throw InvalidInput("time derivative needs at least 3 time slices");
  if (!field.is_uniform()) throw InvalidInput("time derivative needs a uniform time grid");
  const double dt = (field.horizon() - field.start_time()) / static_cast<double>(count - 1);
  const double inv = 1.0 / (2.0 * dt);
  std::vector<PeriodicField> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    PeriodicField d(field.grid(), field.components());
    auto v = d.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      auto f = [&](std::size_t i) { return field.slice(i).values()[k]; };
      if (j == 0) {
        v[k] = (-3.0 * f(0) + 4.0 * f(1) - f(2)) * inv;
      } else if (j + 1 == count) {
        v[k] = (3.0 * f(j) - 4.0 * f(j - 1) + f(j - 2)) * inv;
      } else {
        v[k] = (f(j + 1) - f(j - 1)) * inv;
      }
    }
    out.push_back(std::move(d));
  }
  return SpaceTimeField(field.times(), std::move(out));
}

namespace {
void require_same_shape(const PeriodicField& a, const PeriodicField& b) {
  if (a.grid() != b.grid() || a.components() != b.components()) {
    throw InvalidInput("fields must share grid and component count");
  }
}
}  // namespace

double l2_norm(const PeriodicField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum / static_cast<double>(f.node_count()));
}

double l2_distance(const PeriodicField& a, const PeriodicField& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    const double d = a.values()[k] - b.values()[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.node_count()));
}

double sup_distance(const PeriodicField& a, const PeriodicField& b) {
  require_same_shape(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  }
  return m;
}

double sup_distance(const SpaceTimeField& a, const SpaceTimeField& b) {
  if (a.slice_count() != b.slice_count()) throw InvalidInput("time grids differ in length");
  double m = 0.0;
  for (std::size_t j = 0; j < a.slice_count(); ++j) {
    m = std::max(m, sup_distance(a.slice(j), b.slice(j)));
  }
  return m;
}

std::uint64_t fingerprint(std::span<const double> data, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (double v : data) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::uint64_t fingerprint(const SpaceTimeField& field) noexcept {
  std::uint64_t h = fingerprint(field.times());
  const double shape[] = {static_cast<double>(field.grid().dim()),
                          static_cast<double>(field.grid().points_per_axis()),
                          static_cast<double>(field.components())};
  h = fingerprint(shape, h);
  for (const auto& s : field.slices()) h = fingerprint(s.values(), h);
  return h;
}

}  // namespace burgers
