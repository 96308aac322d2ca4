#include "burgers/interpolation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>

#include "burgers/error.hpp"

namespace burgers {

namespace {

// Solves M_{i-1} + 4 M_i + M_{i+1} = r_i cyclically (Sherman-Morrison on the
// Thomas algorithm). A zero right-hand side yields an exactly zero solution.
void solve_cyclic_141(std::span<double> r, std::vector<double>& work) {
  const std::size_t n = r.size();
  work.resize(3 * n);
  double* c = work.data();
  double* y = c + n;
  double* z = y + n;
  // Modified diagonal for Sherman-Morrison with u = (γ, 0, ..., 0, 1),
  // v = (1, 0, ..., 0, 1/γ), γ = -4.
  const double gamma = -4.0;
  auto thomas = [&](const double* rhs, double* x) {
    double b0 = 4.0 - gamma;
    c[0] = 1.0 / b0;
    x[0] = rhs[0] / b0;
    for (std::size_t i = 1; i < n; ++i) {
      const double b = (i == n - 1) ? 4.0 - 1.0 / gamma : 4.0;
      const double m = 1.0 / (b - c[i - 1]);
      c[i] = m;
      x[i] = (rhs[i] - x[i - 1]) * m;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  };
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = 1.0;
  thomas(r.data(), y);
  thomas(u.data(), z);
  const double vy = y[0] + y[n - 1] / gamma;
  const double vz = z[0] + z[n - 1] / gamma;
  const double factor = vy / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - factor * z[i];
}

// Applies the spline moment operator along `axis` to every component.
std::vector<double> spline_moments(const std::vector<double>& f, const GridSpec& grid,
                                   int components, int axis) {
  const int n = grid.points_per_axis();
  const std::size_t nodes = grid.node_count();
  std::size_t stride = 1;
  for (int a = grid.dim() - 1; a > axis; --a) stride *= n;
  const double scale = 6.0 / (grid.spacing() * grid.spacing());
  std::vector<double> out(f.size());
  std::vector<double> line(n), work;
  for (int c = 0; c < components; ++c) {
    const double* src = f.data() + c * nodes;
    double* dst = out.data() + c * nodes;
    for (std::size_t base = 0; base < nodes; ++base) {
      // Visit each line once, from the node whose axis index is zero.
      if ((base / stride) % n != 0) continue;
      for (int i = 0; i < n; ++i) {
        const double fm = src[base + ((i + n - 1) % n) * stride];
        const double f0 = src[base + i * stride];
        const double fp = src[base + ((i + 1) % n) * stride];
        line[i] = scale * ((fp - f0) - (f0 - fm));
      }
      solve_cyclic_141(line, work);
      for (int i = 0; i < n; ++i) dst[base + i * stride] = line[i];
    }
  }
  return out;
}

}  // namespace

FieldInterpolator::FieldInterpolator(const PeriodicField& field, Interpolation kind)
    : grid_(field.grid()),
      components_(field.components()),
      kind_(kind),
      inv_spacing_(field.grid().points_per_axis() / kTwoPi),
      spline_h2_(1.0 / (6.0 * inv_spacing_ * inv_spacing_)),
      values_(field.values().begin(), field.values().end()) {
  field.require_finite("interpolated field");
  if (kind_ == Interpolation::cubic_spline) {
    const int subsets = 1 << grid_.dim();
    tables_.resize(subsets);
    tables_[0] = values_;
    for (int s = 1; s < subsets; ++s) {
      const int axis = std::countr_zero(static_cast<unsigned>(s));
      tables_[s] = spline_moments(tables_[s & (s - 1)], grid_, components_, axis);
    }
    if (grid_.dim() == 1) build_cells();
  } else {
    coeffs_.push_back(forward_transform(field));
  }
}

void FieldInterpolator::evaluate(std::span<const double> point, std::span<double> out) const {
  for (int a = 0; a < grid_.dim(); ++a) {
    if (!std::isfinite(point[a])) throw InvalidInput("interpolation at a non-finite position");
  }
  if (kind_ == Interpolation::cubic_spline) {
    evaluate_spline(point, out);
  } else {
    evaluate_trig(point, out);
  }
}

// Per-cell power form of the 1-D spline in the local coordinate t:
// f0 + t (f1 - f0) + h²/6 ((s³ - s) m0 + (t³ - t) m1) with s = 1 - t.
void FieldInterpolator::build_cells() {
  const int n = grid_.points_per_axis();
  cells_.resize(static_cast<std::size_t>(components_) * n * 4);
  for (int c = 0; c < components_; ++c) {
    const double* f = values_.data() + static_cast<std::size_t>(c) * n;
    const double* m = tables_[1].data() + static_cast<std::size_t>(c) * n;
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1 == n) ? 0 : i + 1;
      double* cell = cells_.data() + (static_cast<std::size_t>(c) * n + i) * 4;
      cell[0] = f[i];
      cell[1] = (f[ip] - f[i]) - spline_h2_ * (2.0 * m[i] + m[ip]);
      cell[2] = 3.0 * spline_h2_ * m[i];
      cell[3] = spline_h2_ * (m[ip] - m[i]);
    }
  }
}

double FieldInterpolator::evaluate_1d_trig(double x, int component) const {
  std::vector<double> all(components_);
  evaluate_trig(std::span<const double>(&x, 1), all);
  return all[component];
}

void FieldInterpolator::evaluate_spline(std::span<const double> point, std::span<double> out) const {
  const int dim = grid_.dim();
  const int n = grid_.points_per_axis();
  const std::size_t nodes = grid_.node_count();
  if (dim == 1) {
    for (int c = 0; c < components_; ++c) out[c] = evaluate_1d(point[0], c);
    return;
  }
  std::array<detail::AxisLocation, kMaxDim> loc{};
  std::array<double, kMaxDim> phi0{}, phi1{};
  const double h2 = spline_h2_;
  for (int a = 0; a < dim; ++a) {
    loc[a] = detail::locate(point[a], inv_spacing_, n);
    const double t = loc[a].t;
    const double s = 1.0 - t;
    phi0[a] = h2 * (s * s * s - s);
    phi1[a] = h2 * (t * t * t - t);
  }
  const int corners = 1 << dim;
  std::array<std::size_t, 1 << kMaxDim> flat{};
  for (int b = 0; b < corners; ++b) {
    std::size_t f = 0;
    for (int a = 0; a < dim; ++a) {
      int idx = loc[a].index + ((b >> (dim - 1 - a)) & 1);
      if (idx == n) idx = 0;
      f = f * n + static_cast<std::size_t>(idx);
    }
    flat[b] = f;
  }
  std::array<double, 1 << kMaxDim> v{};
  for (int c = 0; c < components_; ++c) {
    double total = 0.0;
    for (int subset = 0; subset < corners; ++subset) {
      const double* table = tables_[subset].data() + c * nodes;
      for (int b = 0; b < corners; ++b) v[b] = table[flat[b]];
      // Reduce the corner cube one axis at a time, last axis first. Corner
      // bit (dim-1-a) selects the upper neighbour along axis a.
      int width = corners;
      for (int a = dim - 1; a >= 0; --a) {
        width /= 2;
        const bool moment = (subset >> a) & 1;
        for (int b = 0; b < width; ++b) {
          const double lo = v[2 * b];
          const double hi = v[2 * b + 1];
          v[b] = moment ? phi0[a] * lo + phi1[a] * hi : lo + loc[a].t * (hi - lo);
        }
      }
      if (subset == 0) {
        total = v[0];
      } else {
        total += v[0];
      }
    }
    out[c] = total;
  }
}

void FieldInterpolator::evaluate_trig(std::span<const double> point, std::span<double> out) const {
  const int dim = grid_.dim();
  const int n = grid_.points_per_axis();
  std::array<detail::AxisLocation, kMaxDim> loc{};
  bool on_node = true;
  for (int a = 0; a < dim; ++a) {
    loc[a] = detail::locate(point[a], inv_spacing_, n);
    on_node = on_node && loc[a].t == 0.0;
  }
  if (on_node) {
    std::array<int, kMaxDim> idx{};
    for (int a = 0; a < dim; ++a) idx[a] = loc[a].index;
    const std::size_t node = grid_.flat_index(std::span<const int>(idx.data(), dim));
    for (int c = 0; c < components_; ++c) out[c] = values_[c * grid_.node_count() + node];
    return;
  }
  const auto& coeffs = coeffs_.front();
  // Per-axis phase tables e^{i k x_a} for k in [-N/2, N/2].
  std::array<std::vector<std::complex<double>>, kMaxDim> phase;
  for (int a = 0; a < dim; ++a) {
    phase[a].resize(n + 1);
    for (int k = -n / 2; k <= n / 2; ++k) phase[a][k + n / 2] = std::polar(1.0, k * point[a]);
  }
  for (int c = 0; c < components_; ++c) {
    const auto data = coeffs.component(c);
    double sum = 0.0;
    for (std::size_t m = 0; m < coeffs.mode_count(); ++m) {
      const auto k = coeffs.wavevector(m);
      std::complex<double> e = 1.0;
      for (int a = 0; a < dim; ++a) e *= phase[a][k[a] + n / 2];
      sum += coeffs.multiplicity(m) * (data[m] * e).real();
    }
    out[c] = sum;
  }
}

std::vector<double> compose(const PeriodicField& field, std::span<const double> positions,
                            Interpolation kind) {
  const int dim = field.grid().dim();
  if (positions.size() % dim != 0) throw InvalidInput("compose: position array is not a multiple of dim");
  const FieldInterpolator interp(field, kind);
  const std::size_t count = positions.size() / dim;
  std::vector<double> out(count * field.components());
  for (std::size_t p = 0; p < count; ++p) {
    interp.evaluate(positions.subspan(p * dim, dim),
                    std::span(out).subspan(p * field.components(), field.components()));
  }
  return out;
}

SpaceTimeInterpolator::SpaceTimeInterpolator(const SpaceTimeField& field, Interpolation kind)
    : times_(field.times()) {
  field.require_finite("space-time field");
  slices_.reserve(field.slice_count());
  for (const auto& s : field.slices()) slices_.emplace_back(s, kind);
}

void SpaceTimeInterpolator::evaluate(double s, std::span<const double> point,
                                     std::span<double> out) const {
  if (!(s >= times_.front() && s <= times_.back())) {
    throw InvalidInput("time " + std::to_string(s) + " outside the field's time range [" +
                       std::to_string(times_.front()) + ", " + std::to_string(times_.back()) + "]");
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), s);
  std::size_t j = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (times_[j] == s || j + 1 == times_.size()) {
    slices_[j].evaluate(point, out);
    return;
  }
  const double w = (s - times_[j]) / (times_[j + 1] - times_[j]);
  std::array<double, kMaxDim * kMaxDim> upper{};
  const int nc = components();
  std::vector<double> heap;
  std::span<double> hi(upper.data(), nc);
  if (nc > static_cast<int>(upper.size())) {
    heap.resize(nc);
    hi = heap;
  }
  slices_[j].evaluate(point, out);
  slices_[j + 1].evaluate(point, hi);
  for (int c = 0; c < nc; ++c) out[c] += w * (hi[c] - out[c]);
}

std::vector<double> eval_spacetime(const SpaceTimeField& field, double s,
                                   std::span<const double> positions, Interpolation kind) {
  const int dim = field.grid().dim();
  if (positions.size() % dim != 0) throw InvalidInput("eval_spacetime: position array is not a multiple of dim");
  if (!(s >= field.start_time() && s <= field.horizon())) {
    throw InvalidInput("eval_spacetime: time " + std::to_string(s) + " outside [" +
                       std::to_string(field.start_time()) + ", " + std::to_string(field.horizon()) + "]");
  }
  const auto& times = field.times();
  const auto it = std::upper_bound(times.begin(), times.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - times.begin()) - 1;
  auto lower = compose(field.slice(j), positions, kind);
  if (times[j] == s || j + 1 == times.size()) return lower;
  const auto upper = compose(field.slice(j + 1), positions, kind);
  const double w = (s - times[j]) / (times[j + 1] - times[j]);
  for (std::size_t k = 0; k < lower.size(); ++k) lower[k] += w * (upper[k] - lower[k]);
  return lower;
}

}  // namespace burgers
