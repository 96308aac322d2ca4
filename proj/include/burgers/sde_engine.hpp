#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "burgers/brownian.hpp"
#include "burgers/interpolation.hpp"
#include "burgers/torus_field.hpp"

namespace burgers {

/// Forward characteristics Z_s^{t,θ} for every (path, start point, step).
/// Positions are kept unwrapped in R^n as start + displacement; the
/// displacement is accumulated directly so that identical increments give
/// bitwise identical displacements for different start points.
class CharacteristicEnsemble {
 public:
  CharacteristicEnsemble(std::vector<double> times, std::size_t start_index, int dim,
                         std::size_t paths, std::vector<double> start_points,
                         std::vector<double> displacement, std::uint64_t drift_fingerprint, double nu);

  const std::vector<double>& times() const noexcept { return times_; }
  double start_time() const noexcept { return times_.front(); }
  /// Index of start_time() in the drift field's time grid.
  std::size_t start_index() const noexcept { return start_index_; }
  std::size_t step_count() const noexcept { return times_.size() - 1; }
  int dim() const noexcept { return dim_; }
  std::size_t paths() const noexcept { return paths_; }
  std::size_t start_count() const noexcept { return start_points_.size() / dim_; }
  std::span<const double> start_points() const noexcept { return start_points_; }
  std::uint64_t drift_fingerprint() const noexcept { return drift_fingerprint_; }
  double nu() const noexcept { return nu_; }

  std::span<const double> displacement(std::size_t path, std::size_t start, std::size_t step) const noexcept;
  double position(std::size_t path, std::size_t start, std::size_t step, int axis) const noexcept;
  /// All start points' positions at (path, step), start-major.
  std::vector<double> positions(std::size_t path, std::size_t step) const;

 private:
  std::vector<double> times_;
  std::size_t start_index_;
  int dim_;
  std::size_t paths_;
  std::vector<double> start_points_;
  std::vector<double> displacement_;
  std::uint64_t drift_fingerprint_;
  double nu_;
};

/// One dim × dim row-major matrix per (path, start point, step); holds the
/// tangent flow ∇Z and samples of the martingale integrand X.
class MatrixPathEnsemble {
 public:
  MatrixPathEnsemble(std::size_t paths, std::size_t starts, std::size_t steps, int dim,
                  std::vector<double> jacobians);

  std::size_t paths() const noexcept { return paths_; }
  std::size_t start_count() const noexcept { return starts_; }
  std::size_t step_count() const noexcept { return steps_; }
  int dim() const noexcept { return dim_; }
  std::span<const double> matrix(std::size_t path, std::size_t start, std::size_t step) const noexcept;

 private:
  std::size_t paths_, starts_, steps_;
  int dim_;
  std::vector<double> jacobians_;
};

using TangentEnsemble = MatrixPathEnsemble;

/// Euler-Maruyama for dZ = y(s, Z) ds + sqrt(2ν) dW started at time t from
/// `start_points` (count × dim). The noise grid must equal the drift's time
/// grid restricted to [t, T].
CharacteristicEnsemble integrate_forward(const SpaceTimeField& drift, double t,
                                         std::span<const double> start_points,
                                         const BrownianEnsemble& noise, double nu);

/// ∇Z_{j+1} = ∇Z_j + ∇y(t_j, Z_j) ∇Z_j Δt_j from the identity, using the
/// spectral gradient of each drift slice composed along the characteristic.
TangentEnsemble integrate_tangent(const SpaceTimeField& drift, const CharacteristicEnsemble& chars);

/// Spectral gradient of every slice; the result has dim*dim components per
/// node for a velocity field.
SpaceTimeField spacetime_gradient(const SpaceTimeField& field);

/// CSV rows (path, start_index, step, time, z0..): refuses ensembles with
/// more than `max_rows` rows.
void write_path_dump_csv(const std::filesystem::path& path, const CharacteristicEnsemble& chars,
                         std::size_t max_rows);

}  // namespace burgers
