#include "burgers/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "burgers/error.hpp"

namespace burgers {

namespace {

// Plan creation in FFTW is not thread safe; execution with the new-array
// interface is. Plans are created once per (dim, N) and kept for the process.
struct PlanPair {
  fftw_plan r2c;
  fftw_plan c2r;
};

const PlanPair& plans_for(const GridSpec& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(grid.dim(), grid.points_per_axis());
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  std::array<int, kMaxDim> dims{};
  dims.fill(grid.points_per_axis());
  const std::size_t real_size = grid.node_count();
  const std::size_t complex_size = real_size / grid.points_per_axis() * (grid.points_per_axis() / 2 + 1);
  auto* real = fftw_alloc_real(real_size);
  auto* cplx = fftw_alloc_complex(complex_size);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_r2c(grid.dim(), dims.data(), real, cplx, flags),
             fftw_plan_dft_c2r(grid.dim(), dims.data(), cplx, real, flags)};
  fftw_free(real);
  fftw_free(cplx);
  return cache.emplace(key, p).first->second;
}

void require_finite(const PeriodicField& field, const char* op) { field.require_finite(op); }

}  // namespace

SpectralCoeffs::SpectralCoeffs(GridSpec grid, int components)
    : grid_(grid),
      components_(components),
      modes_(grid.node_count() / grid.points_per_axis() * (grid.points_per_axis() / 2 + 1)),
      data_(modes_ * components) {}

std::span<const std::complex<double>> SpectralCoeffs::component(int c) const noexcept {
  return std::span(data_).subspan(c * modes_, modes_);
}

std::span<std::complex<double>> SpectralCoeffs::component(int c) noexcept {
  return std::span(data_).subspan(c * modes_, modes_);
}

std::array<int, kMaxDim> SpectralCoeffs::wavevector(std::size_t mode) const noexcept {
  const int n = grid_.points_per_axis();
  const int half = n / 2 + 1;
  std::array<int, kMaxDim> k{};
  k[grid_.dim() - 1] = static_cast<int>(mode % half);
  mode /= half;
  for (int a = grid_.dim() - 2; a >= 0; --a) {
    const int idx = static_cast<int>(mode % n);
    mode /= n;
    k[a] = idx < n / 2 ? idx : idx - n;
  }
  return k;
}

double SpectralCoeffs::multiplicity(std::size_t mode) const noexcept {
  const int n = grid_.points_per_axis();
  const auto last = static_cast<int>(mode % (n / 2 + 1));
  return (last == 0 || last == n / 2) ? 1.0 : 2.0;
}

bool SpectralCoeffs::is_nyquist(std::size_t mode) const noexcept {
  const auto k = wavevector(mode);
  for (int a = 0; a < grid_.dim(); ++a) {
    if (std::abs(k[a]) == grid_.points_per_axis() / 2) return true;
  }
  return false;
}

std::complex<double> SpectralCoeffs::coefficient(int c, std::span<const int> k) const {
  const int n = grid_.points_per_axis();
  const int dim = grid_.dim();
  if (static_cast<int>(k.size()) != dim) throw InvalidInput("wavevector has wrong dimension");
  for (int a = 0; a < dim; ++a) {
    if (std::abs(k[a]) > n / 2) throw InvalidInput("wavevector outside the resolved band");
  }
  std::array<int, kMaxDim> kk{};
  const bool conj = k[dim - 1] < 0;
  for (int a = 0; a < dim; ++a) kk[a] = conj ? -k[a] : k[a];
  std::size_t mode = 0;
  for (int a = 0; a < dim - 1; ++a) {
    const int idx = ((kk[a] % n) + n) % n;
    mode = mode * n + static_cast<std::size_t>(idx);
  }
  mode = mode * (n / 2 + 1) + static_cast<std::size_t>(kk[dim - 1]);
  const auto value = component(c)[mode];
  return conj ? std::conj(value) : value;
}

SpectralCoeffs forward_transform(const PeriodicField& field) {
  require_finite(field, "forward_transform");
  const auto& plans = plans_for(field.grid());
  SpectralCoeffs coeffs(field.grid(), field.components());
  const double scale = 1.0 / static_cast<double>(field.node_count());
  std::vector<double> in(field.node_count());
  for (int c = 0; c < field.components(); ++c) {
    std::ranges::copy(field.component(c), in.begin());
    auto out = coeffs.component(c);
    fftw_execute_dft_r2c(plans.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    for (auto& v : out) v *= scale;
  }
  return coeffs;
}

PeriodicField inverse_transform(const SpectralCoeffs& coeffs) {
  const auto& plans = plans_for(coeffs.grid());
  PeriodicField field(coeffs.grid(), coeffs.components());
  std::vector<std::complex<double>> scratch(coeffs.mode_count());
  for (int c = 0; c < coeffs.components(); ++c) {
    // c2r overwrites its input.
    std::ranges::copy(coeffs.component(c), scratch.begin());
    fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(scratch.data()),
                         field.component(c).data());
  }
  return field;
}

namespace {
// Constant components differentiate to exact zeros; the transform alone would
// leave rounding noise in the nonzero modes.
bool is_constant(std::span<const double> values) {
  return std::ranges::all_of(values, [&](double v) { return v == values.front(); });
}
}  // namespace

PeriodicField spectral_gradient(const PeriodicField& field) {
  const auto coeffs = forward_transform(field);
  const int dim = field.grid().dim();
  const int n = field.grid().points_per_axis();
  SpectralCoeffs grad(field.grid(), field.components() * dim);
  for (int c = 0; c < field.components(); ++c) {
    const auto src = coeffs.component(c);
    for (int j = 0; j < dim; ++j) {
      auto dst = grad.component(c * dim + j);
      for (std::size_t m = 0; m < coeffs.mode_count(); ++m) {
        const int k = coeffs.wavevector(m)[j];
        // The Nyquist mode has no odd-derivative partner on the grid.
        dst[m] = std::abs(k) == n / 2 ? 0.0 : std::complex<double>(0.0, k) * src[m];
      }
    }
  }
  auto out = inverse_transform(grad);
  for (int c = 0; c < field.components(); ++c) {
    if (!is_constant(field.component(c))) continue;
    for (int j = 0; j < dim; ++j) std::ranges::fill(out.component(c * dim + j), 0.0);
  }
  return out;
}

PeriodicField spectral_laplacian(const PeriodicField& field) {
  auto coeffs = forward_transform(field);
  const int dim = field.grid().dim();
  for (int c = 0; c < field.components(); ++c) {
    auto data = coeffs.component(c);
    for (std::size_t m = 0; m < coeffs.mode_count(); ++m) {
      const auto k = coeffs.wavevector(m);
      double k2 = 0.0;
      for (int a = 0; a < dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
      data[m] *= -k2;
    }
  }
  auto out = inverse_transform(coeffs);
  for (int c = 0; c < field.components(); ++c) {
    if (is_constant(field.component(c))) std::ranges::fill(out.component(c), 0.0);
  }
  return out;
}

double sobolev_norm(const PeriodicField& field, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInput("sobolev_norm: alpha must be a finite nonnegative real");
  }
  const auto coeffs = forward_transform(field);
  const int dim = field.grid().dim();
  double sum = 0.0;
  for (int c = 0; c < coeffs.components(); ++c) {
    const auto data = coeffs.component(c);
    for (std::size_t m = 0; m < coeffs.mode_count(); ++m) {
      const auto k = coeffs.wavevector(m);
      double k2 = 0.0;
      for (int a = 0; a < dim; ++a) k2 += static_cast<double>(k[a]) * k[a];
      sum += coeffs.multiplicity(m) * std::pow(1.0 + k2, alpha) * std::norm(data[m]);
    }
  }
  return std::sqrt(sum);
}

void apply_dealias(SpectralCoeffs& coeffs) noexcept {
  const int dim = coeffs.grid().dim();
  const int n = coeffs.grid().points_per_axis();
  for (std::size_t m = 0; m < coeffs.mode_count(); ++m) {
    const auto k = coeffs.wavevector(m);
    bool drop = false;
    for (int a = 0; a < dim; ++a) drop = drop || 3 * std::abs(k[a]) > n;
    if (drop) {
      for (int c = 0; c < coeffs.components(); ++c) coeffs.component(c)[m] = 0.0;
    }
  }
}

PeriodicField advection(const PeriodicField& velocity, bool dealias) {
  const int dim = velocity.grid().dim();
  if (velocity.components() != dim) {
    throw InvalidInput("advection: velocity must have one component per axis");
  }
  PeriodicField y = velocity;
  if (dealias) {
    auto coeffs = forward_transform(velocity);
    apply_dealias(coeffs);
    y = inverse_transform(coeffs);
  }
  const auto grad = spectral_gradient(y);
  PeriodicField product(velocity.grid(), dim);
  for (int i = 0; i < dim; ++i) {
    auto out = product.component(i);
    for (int j = 0; j < dim; ++j) {
      const auto yj = y.component(j);
      const auto dyij = grad.component(i * dim + j);
      for (std::size_t node = 0; node < out.size(); ++node) out[node] += yj[node] * dyij[node];
    }
  }
  if (!dealias) return product;
  auto coeffs = forward_transform(product);
  apply_dealias(coeffs);
  return inverse_transform(coeffs);
}

}  // namespace burgers
