#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "burgers/torus_field.hpp"

namespace burgers {

/// Fourier coefficients c_k = (2π)^-n ∫ f(θ) e^{-ik·θ} dθ of a real field,
/// stored as the non-redundant half spectrum (last axis 0..N/2). The other
/// half follows from c_{-k} = conj(c_k).
class SpectralCoeffs {
 public:
  SpectralCoeffs(GridSpec grid, int components);

  const GridSpec& grid() const noexcept { return grid_; }
  int components() const noexcept { return components_; }
  /// Stored modes per component: N^(n-1) * (N/2 + 1).
  std::size_t mode_count() const noexcept { return modes_; }

  std::span<const std::complex<double>> component(int c) const noexcept;
  std::span<std::complex<double>> component(int c) noexcept;

  /// Integer wavevector of stored mode `mode`; indices above N/2 on the full
  /// axes map to negative wavenumbers, N/2 maps to -N/2.
  std::array<int, kMaxDim> wavevector(std::size_t mode) const noexcept;
  /// Number of full-spectrum modes represented by stored mode (1 or 2).
  double multiplicity(std::size_t mode) const noexcept;
  /// True if some axis of `mode` sits on the Nyquist index N/2.
  bool is_nyquist(std::size_t mode) const noexcept;
  /// c_k for any wavevector with |k_a| <= N/2, using conjugate symmetry.
  std::complex<double> coefficient(int c, std::span<const int> k) const;

 private:
  GridSpec grid_;
  int components_;
  std::size_t modes_;
  std::vector<std::complex<double>> data_;
};

SpectralCoeffs forward_transform(const PeriodicField& field);
PeriodicField inverse_transform(const SpectralCoeffs& coeffs);

/// Jacobian ∂f_c/∂θ_j on the grid. Output component c * dim + j.
PeriodicField spectral_gradient(const PeriodicField& field);
/// Componentwise Laplacian (multiplication by -|k|^2).
PeriodicField spectral_laplacian(const PeriodicField& field);
/// (Σ_c Σ_k (1 + |k|^2)^α |c_k|^2)^(1/2); α = 0 is the normalized L2 norm.
double sobolev_norm(const PeriodicField& field, double alpha);

/// 2/3-rule truncation: zero every mode with 3|k_a| > N on some axis.
void apply_dealias(SpectralCoeffs& coeffs) noexcept;
/// (y·∇)y for a velocity field (components == dim), with optional 2/3 rule
/// applied to both factors and to the product.
PeriodicField advection(const PeriodicField& velocity, bool dealias);

}  // namespace burgers
