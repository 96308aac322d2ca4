#include "burgers/picard.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "burgers/error.hpp"
#include "burgers/interpolation.hpp"
#include "burgers/parallel.hpp"
#include "burgers/rng.hpp"
#include "burgers/spectral.hpp"

namespace burgers {

SpaceTimeField resample_in_time(const SpaceTimeField& forcing, std::span<const double> times) {
  validate_time_grid(times);
  if (times.front() < forcing.start_time() || times.back() > forcing.horizon()) {
    throw InvalidInput("forcing does not cover the requested time range");
  }
  std::vector<PeriodicField> slices;
  slices.reserve(times.size());
  for (double s : times) slices.push_back(slice_at(forcing, s));
  return SpaceTimeField(std::vector<double>(times.begin(), times.end()), std::move(slices));
}

namespace {

// Running mean and sum of squared deviations. A constant sample yields its
// value exactly.
struct Welford {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double standard_error() const noexcept {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

}  // namespace

FeynmanKacSampler::FeynmanKacSampler(const SpaceTimeField& drift, const SpaceTimeField& forcing,
                                     const McConfig& mc, double nu)
    : times_(drift.times()),
      dim_(drift.grid().dim()),
      mc_(mc),
      sigma_(std::sqrt(2.0 * nu)),
      has_forcing_(forcing.sup_abs() != 0.0) {
  if (forcing.times() != drift.times() || forcing.grid() != drift.grid()) {
    throw InvalidInput("Feynman-Kac sampler: forcing must share the drift's grids");
  }
  const std::size_t steps = drift.step_count();
  drift_.reserve(steps);
  for (std::size_t j = 0; j < steps; ++j) drift_.emplace_back(drift.slice(j));
  if (has_forcing_) {
    forcing_.reserve(steps);
    for (std::size_t j = 0; j < steps; ++j) forcing_.emplace_back(forcing.slice(j));
  }
  sqrt_dt_.resize(steps);
  for (std::size_t j = 0; j < steps; ++j) sqrt_dt_[j] = std::sqrt(times_[j + 1] - times_[j]);
}

void FeynmanKacSampler::estimate(std::size_t start, std::size_t anchor, std::span<const double> point,
                                 const FieldInterpolator& anchor_field, std::uint64_t restart_id,
                                 std::uint64_t restart_count, std::span<double> mean,
                                 std::span<double> se) const {
  std::array<double, kMaxDim> z{}, v{}, acc{}, value{}, pair{};
  std::array<Welford, kMaxDim> stats{};
  for (std::size_t m = 0; m < mc_.paths; ++m) {
    const std::uint64_t stream = noise_stream(m, restart_id, restart_count, mc_.mode, mc_.antithetic);
    NormalStream normal(mc_.seed, stream);
    const double sign = antithetic_sign(m, mc_.antithetic);
    std::copy(point.begin(), point.end(), z.begin());
    acc.fill(0.0);
    for (std::size_t l = start; l < anchor; ++l) {
      const double dt = times_[l + 1] - times_[l];
      const double scale = sign * sigma_ * sqrt_dt_[l];
      if (dim_ == 1) {
        if (has_forcing_) acc[0] += forcing_[l].evaluate_1d(z[0]) * dt;
        z[0] += drift_[l].evaluate_1d(z[0]) * dt + scale * normal(l);
        continue;
      }
      if (has_forcing_) {
        forcing_[l].evaluate(std::span<const double>(z.data(), dim_), std::span<double>(v.data(), dim_));
        for (int a = 0; a < dim_; ++a) acc[a] += v[a] * dt;
      }
      drift_[l].evaluate(std::span<const double>(z.data(), dim_), std::span<double>(v.data(), dim_));
      for (int a = 0; a < dim_; ++a) z[a] += v[a] * dt + scale * normal(l * dim_ + a);
    }
    if (dim_ == 1) {
      value[0] = anchor_field.evaluate_1d(z[0]);
    } else {
      anchor_field.evaluate(std::span<const double>(z.data(), dim_), std::span<double>(value.data(), dim_));
    }
    for (int a = 0; a < dim_; ++a) value[a] += acc[a];
    if (!mc_.antithetic) {
      for (int a = 0; a < dim_; ++a) stats[a].add(value[a]);
    } else if (m % 2 == 0) {
      pair = value;
    } else {
      for (int a = 0; a < dim_; ++a) stats[a].add(0.5 * (pair[a] + value[a]));
    }
  }
  for (int a = 0; a < dim_; ++a) {
    mean[a] = stats[a].mean;
    se[a] = stats[a].standard_error();
    if (!std::isfinite(mean[a])) {
      std::ostringstream msg;
      msg << "Monte Carlo estimate is non-finite at t = " << times_[start] << ", theta = (";
      for (int b = 0; b < dim_; ++b) msg << (b ? ", " : "") << point[b];
      msg << ")";
      throw SolverError(msg.str());
    }
  }
}

void FeynmanKacSampler::estimate_step(std::size_t start, std::span<const double> point,
                                      const FieldInterpolator& next, std::uint64_t step_stream,
                                      std::span<double> mean, std::span<double> se) const {
  const double dt = times_[start + 1] - times_[start];
  const double scale = sigma_ * sqrt_dt_[start];
  std::array<double, kMaxDim> drift{}, force{}, z{}, value{}, pair{};
  drift_[start].evaluate(point, std::span<double>(drift.data(), dim_));
  if (has_forcing_) forcing_[start].evaluate(point, std::span<double>(force.data(), dim_));
  NormalStream normal(mc_.seed, step_stream);
  std::array<Welford, kMaxDim> stats{};
  for (std::size_t m = 0; m < mc_.paths; ++m) {
    const std::size_t draw = mc_.antithetic ? (m & ~std::size_t{1}) : m;
    const double sign = antithetic_sign(m, mc_.antithetic);
    if (dim_ == 1) {
      value[0] = next.evaluate_1d(point[0] + drift[0] * dt + sign * scale * normal(draw));
    } else {
      for (int a = 0; a < dim_; ++a) z[a] = point[a] + drift[a] * dt + sign * scale * normal(draw * dim_ + a);
      next.evaluate(std::span<const double>(z.data(), dim_), std::span<double>(value.data(), dim_));
    }
    for (int a = 0; a < dim_; ++a) value[a] += force[a] * dt;
    if (!mc_.antithetic) {
      for (int a = 0; a < dim_; ++a) stats[a].add(value[a]);
    } else if (m % 2 == 0) {
      pair = value;
    } else {
      for (int a = 0; a < dim_; ++a) stats[a].add(0.5 * (pair[a] + value[a]));
    }
  }
  for (int a = 0; a < dim_; ++a) {
    mean[a] = stats[a].mean;
    se[a] = stats[a].standard_error();
    if (!std::isfinite(mean[a])) {
      std::ostringstream msg;
      msg << "Monte Carlo estimate is non-finite at t = " << times_[start] << ", theta = (";
      for (int b = 0; b < dim_; ++b) msg << (b ? ", " : "") << point[b];
      msg << ")";
      throw SolverError(msg.str());
    }
  }
}

namespace {

// Streams of one-step fills live in the upper half of the stream space.
constexpr std::uint64_t kStepStreamBase = std::uint64_t{1} << 63;

void validate_mc(const McConfig& mc) {
  if (mc.paths < 1) throw InvalidInput("Monte Carlo path count must be >= 1");
  if (mc.antithetic && mc.paths % 2 != 0) {
    throw InvalidInput("antithetic sampling needs an even path count");
  }
}

}  // namespace

GammaResult gamma_map(const SpaceTimeField& drift, const PeriodicField& terminal,
                      const SpaceTimeField& forcing, const McConfig& mc, double nu,
                      int restart_stride) {
  drift.require_finite("gamma_map drift");
  terminal.require_finite("gamma_map terminal data");
  validate_mc(mc);
  const int dim = drift.grid().dim();
  if (drift.components() != dim || terminal.components() != dim) {
    throw InvalidInput("gamma_map: drift and terminal data must be velocity fields");
  }
  if (terminal.grid() != drift.grid()) throw InvalidInput("gamma_map: terminal data grid differs from drift grid");
  if (restart_stride < 1) throw InvalidInput("gamma_map: restart stride must be >= 1");
  if (!(nu >= 0.0)) throw InvalidInput("gamma_map: viscosity must be >= 0");
  const auto forcing_on_grid = resample_in_time(forcing, drift.times());
  forcing_on_grid.require_finite("gamma_map forcing");
  if (forcing_on_grid.grid() != drift.grid() || forcing_on_grid.components() != dim) {
    throw InvalidInput("gamma_map: forcing grid differs from drift grid");
  }

  const std::size_t steps = drift.step_count();
  const auto& grid = drift.grid();
  const std::size_t nodes = grid.node_count();
  const std::size_t stride = static_cast<std::size_t>(restart_stride);
  const FeynmanKacSampler sampler(drift, forcing_on_grid, mc, nu);

  std::vector<PeriodicField> value(steps + 1, PeriodicField(grid, dim));
  std::vector<PeriodicField> se(steps + 1, PeriodicField(grid, dim));
  value[steps] = terminal;

  auto estimate = [&](std::size_t j, std::size_t node, bool restart, const FieldInterpolator& field) {
    std::array<double, kMaxDim> theta{}, mean{}, err{};
    grid.node_point(node, theta);
    const std::span<const double> point(theta.data(), dim);
    if (restart) {
      sampler.estimate(j, steps, point, field, j * nodes + node, steps * nodes,
                       std::span<double>(mean.data(), dim), std::span<double>(err.data(), dim));
    } else {
      const std::uint64_t id = mc.mode == NoiseMode::common ? j : j * nodes + node;
      sampler.estimate_step(j, point, field, kStepStreamBase | id, std::span<double>(mean.data(), dim),
                            std::span<double>(err.data(), dim));
    }
    for (int a = 0; a < dim; ++a) {
      value[j].at(a, node) = mean[a];
      se[j].at(a, node) = err[a];
    }
  };

  // Full restarts to the horizon from every stride-th slice.
  std::vector<std::size_t> restart;
  for (std::size_t j = 0; j < steps; j += stride) restart.push_back(j);
  const FieldInterpolator horizon_field(terminal);
  parallel_for(restart.size() * nodes, [&](std::size_t task) {
    estimate(restart[task / nodes], task % nodes, true, horizon_field);
  });

  // The other slices, backwards: y(t_j) = E[y(t_{j+1}, Z_{j+1})] + F(t_j) Δt_j
  // with the new slice j+1. Its own error is carried into the reported one.
  for (std::size_t j = steps; j-- > 0;) {
    if (j % stride == 0) continue;
    const FieldInterpolator next(value[j + 1]);
    parallel_for(nodes, [&](std::size_t node) { estimate(j, node, false, next); });
    auto err = se[j].values();
    const auto carried = se[j + 1].values();
    for (std::size_t k = 0; k < err.size(); ++k) err[k] = std::hypot(err[k], carried[k]);
  }
  return {SpaceTimeField(drift.times(), std::move(value)), SpaceTimeField(drift.times(), std::move(se))};
}

PicardResult picard_solve(const PeriodicField& terminal, const SpaceTimeField& forcing, double nu,
                          std::span<const double> times, const McConfig& mc,
                          const PicardOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidInput("picard_solve: tol must be positive");
  if (options.max_iter < 1) throw InvalidInput("picard_solve: max_iter must be >= 1");
  validate_time_grid(times);
  validate_mc(mc);
  const int dim = terminal.grid().dim();
  if (terminal.components() != dim) throw InvalidInput("picard_solve: terminal data must be a velocity field");

  const std::vector<double> grid_times(times.begin(), times.end());
  const auto forcing_on_grid = resample_in_time(forcing, grid_times);
  const double horizon = grid_times.back() - grid_times.front();
  const auto budget = contraction_budget(lipschitz_budget(terminal, forcing_on_grid), horizon);

  PicardState state{SpaceTimeField::constant_in_time(grid_times, PeriodicField(terminal.grid(), dim)),
                    SpaceTimeField::constant_in_time(grid_times, PeriodicField(terminal.grid(), dim)),
                    0, {}, mc, false, {}, {}};
  if (!budget.contracts()) {
    std::ostringstream msg;
    msg << "horizon T = " << horizon << " is not below T0 = " << budget.t0.value_or(INFINITY)
        << " (gamma = " << budget.gamma << "); contraction is not guaranteed";
    state.warnings.push_back(msg.str());
  }

  bool warned_growth = false;
  for (int k = 1; k <= options.max_iter; ++k) {
    const auto start = std::chrono::steady_clock::now();
    auto next = gamma_map(state.iterate, terminal, forcing_on_grid, mc, nu, options.restart_stride);
    const double diff = sup_distance(next.value, state.iterate);
    state.iteration_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    if (!std::isfinite(diff) || diff > 1e8) {
      throw SolverError("Picard iteration diverged at k = " + std::to_string(k) +
                        " (sup difference " + std::to_string(diff) + ")");
    }
    state.diff_history.push_back(diff);
    state.iterate = std::move(next.value);
    state.standard_error = std::move(next.standard_error);
    state.k = k;
    if (diff < options.tol) {
      state.converged = true;
      break;
    }
    const auto& h = state.diff_history;
    if (!warned_growth && h.size() >= 3 && h[h.size() - 1] > h[h.size() - 2] &&
        h[h.size() - 2] > h[h.size() - 3]) {
      state.warnings.push_back("successive differences grew twice in a row at k = " +
                               std::to_string(k) + "; the map is not contracting");
      warned_growth = true;
    }
  }
  if (!state.converged) {
    state.warnings.push_back("no convergence within max_iter = " + std::to_string(options.max_iter) +
                             " (last difference " + std::to_string(state.diff_history.back()) + ")");
  }
  auto solution = state.iterate;
  return {std::move(solution), std::move(state), budget};
}

MartingaleIntegrandField::MartingaleIntegrandField(const SpaceTimeField& y)
    : gradient_(spacetime_gradient(y)) {
  slices_.reserve(gradient_.slice_count());
  for (const auto& s : gradient_.slices()) slices_.emplace_back(s);
}

void MartingaleIntegrandField::evaluate(std::size_t j, std::span<const double> point,
                                        std::span<double> out) const {
  slices_.at(j).evaluate(point, out);
}

MatrixPathEnsemble martingale_integrand(const SpaceTimeField& y, const CharacteristicEnsemble& chars,
                                        [[maybe_unused]] double nu) {
  const int dim = chars.dim();
  if (y.grid().dim() != dim || y.components() != dim) {
    throw InvalidInput("martingale_integrand: field and characteristics differ in dimension");
  }
  const std::size_t j0 = chars.start_index();
  if (j0 + chars.step_count() != y.step_count() ||
      !std::equal(chars.times().begin(), chars.times().end(), y.times().begin() + j0)) {
    throw InvalidInput("martingale_integrand: characteristics and field use different time grids");
  }
  const MartingaleIntegrandField field(y);
  const std::size_t block = static_cast<std::size_t>(dim) * dim;
  const std::size_t steps = chars.step_count();
  const std::size_t starts = chars.start_count();
  std::vector<double> values(chars.paths() * starts * (steps + 1) * block);
  parallel_for(chars.paths(), [&](std::size_t p) {
    std::array<double, kMaxDim> z{};
    for (std::size_t s = 0; s < starts; ++s) {
      for (std::size_t j = 0; j <= steps; ++j) {
        for (int a = 0; a < dim; ++a) z[a] = chars.position(p, s, j, a);
        double* out = values.data() + ((p * starts + s) * (steps + 1) + j) * block;
        field.evaluate(j0 + j, std::span<const double>(z.data(), dim), std::span<double>(out, block));
      }
    }
  });
  return MatrixPathEnsemble(chars.paths(), starts, steps, dim, std::move(values));
}

}  // namespace burgers
