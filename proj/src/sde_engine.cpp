#include "burgers/sde_engine.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "burgers/error.hpp"
#include "burgers/parallel.hpp"
#include "burgers/spectral.hpp"

namespace burgers {

CharacteristicEnsemble::CharacteristicEnsemble(std::vector<double> times, std::size_t start_index,
                                               int dim, std::size_t paths,
                                               std::vector<double> start_points,
                                               std::vector<double> displacement,
                                               std::uint64_t drift_fingerprint, double nu)
    : times_(std::move(times)),
      start_index_(start_index),
      dim_(dim),
      paths_(paths),
      start_points_(std::move(start_points)),
      displacement_(std::move(displacement)),
      drift_fingerprint_(drift_fingerprint),
      nu_(nu) {
  if (displacement_.size() != paths_ * start_count() * times_.size() * dim_) {
    throw InvalidInput("characteristic displacement array has the wrong size");
  }
}

std::span<const double> CharacteristicEnsemble::displacement(std::size_t path, std::size_t start,
                                                             std::size_t step) const noexcept {
  const std::size_t offset = ((path * start_count() + start) * times_.size() + step) * dim_;
  return std::span(displacement_).subspan(offset, dim_);
}

double CharacteristicEnsemble::position(std::size_t path, std::size_t start, std::size_t step,
                                        int axis) const noexcept {
  return start_points_[start * dim_ + axis] + displacement(path, start, step)[axis];
}

std::vector<double> CharacteristicEnsemble::positions(std::size_t path, std::size_t step) const {
  std::vector<double> out(start_points_.size());
  for (std::size_t s = 0; s < start_count(); ++s) {
    for (int a = 0; a < dim_; ++a) out[s * dim_ + a] = position(path, s, step, a);
  }
  return out;
}

MatrixPathEnsemble::MatrixPathEnsemble(std::size_t paths, std::size_t starts, std::size_t steps, int dim,
                                 std::vector<double> jacobians)
    : paths_(paths), starts_(starts), steps_(steps), dim_(dim), jacobians_(std::move(jacobians)) {
  if (jacobians_.size() != paths_ * starts_ * (steps_ + 1) * dim_ * dim_) {
    throw InvalidInput("tangent array has the wrong size");
  }
}

std::span<const double> MatrixPathEnsemble::matrix(std::size_t path, std::size_t start,
                                                  std::size_t step) const noexcept {
  const std::size_t block = static_cast<std::size_t>(dim_) * dim_;
  const std::size_t offset = ((path * starts_ + start) * (steps_ + 1) + step) * block;
  return std::span(jacobians_).subspan(offset, block);
}

namespace {

std::size_t checked_start_index(const SpaceTimeField& drift, double t) {
  const auto j0 = drift.time_index(t);
  if (j0 < 0) {
    throw InvalidInput("start time " + std::to_string(t) + " is not a node of the drift's time grid");
  }
  if (static_cast<std::size_t>(j0) == drift.step_count()) {
    throw InvalidInput("start time equals the horizon; nothing to integrate");
  }
  return static_cast<std::size_t>(j0);
}

}  // namespace

CharacteristicEnsemble integrate_forward(const SpaceTimeField& drift, double t,
                                         std::span<const double> start_points,
                                         const BrownianEnsemble& noise, double nu) {
  drift.require_finite("integrate_forward drift");
  const int dim = drift.grid().dim();
  if (drift.components() != dim) throw InvalidInput("integrate_forward: drift must be a velocity field");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidInput("integrate_forward: viscosity must be >= 0");
  if (noise.dim() != dim) throw InvalidInput("integrate_forward: noise dimension differs from the torus dimension");
  if (start_points.empty() || start_points.size() % dim != 0) {
    throw InvalidInput("integrate_forward: start points must be a non-empty multiple of dim");
  }
  for (double x : start_points) {
    if (!std::isfinite(x)) throw InvalidInput("integrate_forward: non-finite start point");
  }
  const std::size_t j0 = checked_start_index(drift, t);
  const std::vector<double> times(drift.times().begin() + j0, drift.times().end());
  if (noise.times() != times) {
    throw InvalidInput("integrate_forward: noise time grid must equal the drift grid restricted to [t, T]");
  }
  const std::size_t starts = start_points.size() / dim;
  if (noise.mode() == NoiseMode::independent && noise.start_count() != starts) {
    throw InvalidInput("integrate_forward: independent noise was drawn for a different start count");
  }

  const std::size_t steps = times.size() - 1;
  const std::size_t paths = noise.paths();
  std::vector<FieldInterpolator> slices;
  slices.reserve(steps);
  for (std::size_t j = 0; j < steps; ++j) slices.emplace_back(drift.slice(j0 + j));
  const double sigma = std::sqrt(2.0 * nu);

  std::vector<double> disp(paths * starts * (steps + 1) * dim, 0.0);
  parallel_for(paths, [&](std::size_t p) {
    std::array<double, kMaxDim> z{}, v{};
    for (std::size_t s = 0; s < starts; ++s) {
      double* d = disp.data() + (p * starts + s) * (steps + 1) * dim;
      for (std::size_t j = 0; j < steps; ++j) {
        const double dt = times[j + 1] - times[j];
        for (int a = 0; a < dim; ++a) z[a] = start_points[s * dim + a] + d[j * dim + a];
        slices[j].evaluate(std::span<const double>(z.data(), dim), std::span<double>(v.data(), dim));
        const auto dw = noise.increment(p, s, j);
        for (int a = 0; a < dim; ++a) d[(j + 1) * dim + a] = d[j * dim + a] + v[a] * dt + sigma * dw[a];
      }
    }
  });
  return CharacteristicEnsemble(times, j0, dim, paths,
                                std::vector<double>(start_points.begin(), start_points.end()),
                                std::move(disp), fingerprint(drift), nu);
}

SpaceTimeField spacetime_gradient(const SpaceTimeField& field) {
  std::vector<PeriodicField> slices;
  slices.reserve(field.slice_count());
  for (const auto& s : field.slices()) slices.push_back(spectral_gradient(s));
  return SpaceTimeField(field.times(), std::move(slices));
}

TangentEnsemble integrate_tangent(const SpaceTimeField& drift, const CharacteristicEnsemble& chars) {
  if (fingerprint(drift) != chars.drift_fingerprint()) {
    throw InvalidInput("integrate_tangent: characteristics were produced from a different drift");
  }
  const int dim = chars.dim();
  const std::size_t j0 = chars.start_index();
  const std::size_t steps = chars.step_count();
  if (j0 + steps != drift.step_count()) throw InvalidInput("integrate_tangent: time grid mismatch");
  std::vector<FieldInterpolator> grads;
  grads.reserve(steps);
  for (std::size_t j = 0; j < steps; ++j) grads.emplace_back(spectral_gradient(drift.slice(j0 + j)));

  const std::size_t starts = chars.start_count();
  const std::size_t block = static_cast<std::size_t>(dim) * dim;
  std::vector<double> jac(chars.paths() * starts * (steps + 1) * block, 0.0);
  parallel_for(chars.paths(), [&](std::size_t p) {
    std::array<double, kMaxDim> z{};
    std::array<double, kMaxDim * kMaxDim> g{}, next{};
    for (std::size_t s = 0; s < starts; ++s) {
      double* m = jac.data() + (p * starts + s) * (steps + 1) * block;
      for (int a = 0; a < dim; ++a) m[a * dim + a] = 1.0;
      for (std::size_t j = 0; j < steps; ++j) {
        const double dt = chars.times()[j + 1] - chars.times()[j];
        for (int a = 0; a < dim; ++a) z[a] = chars.position(p, s, j, a);
        grads[j].evaluate(std::span<const double>(z.data(), dim), std::span<double>(g.data(), block));
        const double* cur = m + j * block;
        for (int r = 0; r < dim; ++r) {
          for (int c = 0; c < dim; ++c) {
            double acc = 0.0;
            for (int k = 0; k < dim; ++k) acc += g[r * dim + k] * cur[k * dim + c];
            next[r * dim + c] = cur[r * dim + c] + acc * dt;
          }
        }
        std::copy(next.begin(), next.begin() + block, m + (j + 1) * block);
      }
    }
  });
  return TangentEnsemble(chars.paths(), starts, steps, dim, std::move(jac));
}

void write_path_dump_csv(const std::filesystem::path& path, const CharacteristicEnsemble& chars,
                         std::size_t max_rows) {
  const std::size_t rows = chars.paths() * chars.start_count() * (chars.step_count() + 1);
  if (rows > max_rows) {
    throw InvalidInput("path dump would write " + std::to_string(rows) + " rows, limit is " +
                       std::to_string(max_rows));
  }
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string());
  out << std::setprecision(17) << "path,start_index,step,time";
  for (int a = 0; a < chars.dim(); ++a) out << ",z" << a;
  out << '\n';
  for (std::size_t p = 0; p < chars.paths(); ++p) {
    for (std::size_t s = 0; s < chars.start_count(); ++s) {
      for (std::size_t j = 0; j <= chars.step_count(); ++j) {
        out << p << ',' << s << ',' << j << ',' << chars.times()[j];
        for (int a = 0; a < chars.dim(); ++a) out << ',' << chars.position(p, s, j, a);
        out << '\n';
      }
    }
  }
}

}  // namespace burgers
