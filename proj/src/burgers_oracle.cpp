#include "burgers/burgers_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>

#include "burgers/error.hpp"
#include "burgers/spectral.hpp"

namespace burgers {

namespace {

// Real-axis extent of the RK4 stability region is about 2.785 and the
// imaginary-axis extent about 2.828.
constexpr double kRk4Diffusive = 2.78;
constexpr double kRk4Advective = 2.8;

void check_stability(const OracleConfig& config, double step, double sup_velocity, double s) {
  const double kmax = config.grid.points_per_axis() / 2.0;
  const int dim = config.grid.dim();
  const double diffusive = step * config.nu * dim * kmax * kmax;
  if (diffusive > kRk4Diffusive) {
    std::ostringstream msg;
    msg << "oracle step " << step << " violates the diffusive bound dt*nu*n*(N/2)^2 = " << diffusive
        << " > " << kRk4Diffusive;
    throw InvalidInput(msg.str());
  }
  const double advective = step * kmax * dim * sup_velocity;
  if (advective > kRk4Advective) {
    std::ostringstream msg;
    msg << "oracle step " << step << " violates the advective bound dt*(N/2)*n*sup|y| = " << advective
        << " > " << kRk4Advective << " at s = " << s;
    throw InvalidInput(msg.str());
  }
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

}  // namespace

OracleSolution solve_backward_burgers(const PeriodicField& terminal, const SpaceTimeField& forcing,
                                      const OracleConfig& config) {
  const auto& grid = config.grid;
  const int dim = grid.dim();
  if (!(config.nu > 0.0) || !std::isfinite(config.nu)) throw InvalidInput("oracle: nu must be positive");
  if (!(config.horizon > 0.0) || !std::isfinite(config.horizon)) {
    throw InvalidInput("oracle: T must be positive");
  }
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw InvalidInput("oracle: dt must be positive");
  if (terminal.grid() != grid || terminal.components() != dim) {
    throw InvalidInput("oracle: terminal field does not match the oracle grid");
  }
  if (forcing.grid() != grid || forcing.components() != dim) {
    throw InvalidInput("oracle: forcing does not match the oracle grid");
  }
  if (forcing.start_time() > 0.0 || forcing.horizon() < config.horizon) {
    throw InvalidInput("oracle: forcing must cover [0, T]");
  }
  terminal.require_finite("oracle terminal");
  forcing.require_finite("oracle forcing");

  int out_steps = config.output_steps;
  if (out_steps == 0) out_steps = std::max(1, static_cast<int>(std::lround(config.horizon / config.dt)));
  if (out_steps < 1) throw InvalidInput("oracle: output_steps must be positive");
  const auto times = uniform_times(0.0, config.horizon, out_steps);
  const double interval = config.horizon / out_steps;
  const int substeps = std::max(1, static_cast<int>(std::ceil(interval / config.dt * (1.0 - 1e-12))));
  const double step = interval / substeps;
  check_stability(config, step, terminal.sup_abs(), config.horizon);

  const bool forced = forcing.sup_abs() != 0.0;
  const double T = config.horizon;
  // ∂_τ y = (y·∇)y + νΔy + F(T - τ).
  auto rhs = [&](const PeriodicField& y, double tau) {
    PeriodicField r = advection(y, config.dealias);
    axpy(r.values(), config.nu, spectral_laplacian(y).values());
    if (forced) {
      const double s = std::clamp(T - tau, 0.0, T);
      axpy(r.values(), 1.0, slice_at(forcing, s).values());
    }
    return r;
  };

  std::vector<PeriodicField> slices(times.size(), PeriodicField(grid, dim));
  slices.back() = terminal;
  PeriodicField y = terminal;
  PeriodicField stage(grid, dim);
  for (int j = out_steps; j > 0; --j) {
    const double s_hi = times[j];
    for (int m = 0; m < substeps; ++m) {
      const double tau = (T - s_hi) + m * step;
      const auto k1 = rhs(y, tau);
      stage = y;
      axpy(stage.values(), 0.5 * step, k1.values());
      const auto k2 = rhs(stage, tau + 0.5 * step);
      stage = y;
      axpy(stage.values(), 0.5 * step, k2.values());
      const auto k3 = rhs(stage, tau + 0.5 * step);
      stage = y;
      axpy(stage.values(), step, k3.values());
      const auto k4 = rhs(stage, tau + step);
      auto v = y.values();
      for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] += step / 6.0 * (k1.values()[k] + 2.0 * k2.values()[k] + 2.0 * k3.values()[k] + k4.values()[k]);
      }
      if (!y.all_finite()) {
        std::ostringstream msg;
        msg << "oracle state blew up at s = " << T - (tau + step);
        throw SolverError(msg.str());
      }
    }
    slices[j - 1] = y;
    check_stability(config, step, y.sup_abs(), times[j - 1]);
  }

  OracleSolution out{SpaceTimeField(times, std::move(slices)), {}, true, step, substeps};
  out.energy.reserve(times.size());
  for (const auto& slice : out.field.slices()) out.energy.push_back(l2_norm(slice));
  for (std::size_t j = 0; j + 1 < out.energy.size(); ++j) {
    if (out.energy[j] > out.energy[j + 1] * (1.0 + 1e-12)) out.energy_monotone = false;
  }
  return out;
}

PeriodicField cole_hopf_solution(const PeriodicField& u0, double nu, double t) {
  const auto& grid = u0.grid();
  if (grid.dim() != 1 || u0.components() != 1) throw InvalidInput("Cole-Hopf needs a scalar 1-D field");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidInput("Cole-Hopf: nu must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("Cole-Hopf: t must be nonnegative");
  u0.require_finite("Cole-Hopf initial data");

  const auto spec = forward_transform(u0);
  const double mean = spec.component(0)[0].real();
  if (std::abs(mean) > 1e-12 * std::max(1.0, u0.sup_abs())) {
    throw InvalidInput("Cole-Hopf needs zero-mean initial data, mean = " + std::to_string(mean));
  }
  if (u0.sup_abs() == 0.0) return PeriodicField(grid, 1);

  const std::complex<double> i(0.0, 1.0);
  // Periodic primitive of u0.
  SpectralCoeffs prim(grid, 1);
  for (std::size_t m = 0; m < spec.mode_count(); ++m) {
    const int k = spec.wavevector(m)[0];
    if (k == 0 || spec.is_nyquist(m)) continue;
    prim.component(0)[m] = spec.component(0)[m] / (i * static_cast<double>(k));
  }
  const auto P = inverse_transform(prim);
  const double pmin = *std::ranges::min_element(P.values());
  PeriodicField phi0(grid, 1);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    phi0.values()[n] = std::exp(-(P.values()[n] - pmin) / (2.0 * nu));
  }

  auto heat = forward_transform(phi0);
  SpectralCoeffs dphi(grid, 1);
  for (std::size_t m = 0; m < heat.mode_count(); ++m) {
    const double k = spec.wavevector(m)[0];
    heat.component(0)[m] *= std::exp(-nu * k * k * t);
    if (!heat.is_nyquist(m)) dphi.component(0)[m] = i * k * heat.component(0)[m];
  }
  const auto phi = inverse_transform(heat);
  const auto phi_x = inverse_transform(dphi);
  PeriodicField u(grid, 1);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    u.values()[n] = -2.0 * nu * phi_x.values()[n] / phi.values()[n];
  }
  u.require_finite("Cole-Hopf solution");
  return u;
}

SpaceTimeField time_reversal(const SpaceTimeField& u, double horizon) {
  const auto& t = u.times();
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(horizon));
  if (!std::isfinite(horizon) || t.front() < -slack || t.back() > horizon + slack) {
    throw InvalidInput("time reversal: field times must lie in [0, T]");
  }
  const std::size_t count = t.size();
  std::vector<double> reflected(count);
  bool symmetric = true;
  for (std::size_t j = 0; j < count; ++j) {
    reflected[j] = horizon - t[count - 1 - j];
    if (std::abs(reflected[j] - t[j]) > slack) symmetric = false;
  }
  std::vector<PeriodicField> slices;
  slices.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    PeriodicField v = u.slice(count - 1 - j);
    for (double& x : v.values()) x = -x;
    slices.push_back(std::move(v));
  }
  return SpaceTimeField(symmetric ? t : std::move(reflected), std::move(slices));
}

std::vector<double> classical_residual(const SpaceTimeField& u, const SpaceTimeField& force, double nu,
                                       bool dealias) {
  if (u.components() != u.grid().dim()) throw InvalidInput("classical residual needs a velocity field");
  if (force.grid() != u.grid() || force.components() != u.components()) {
    throw InvalidInput("classical residual: force does not match the field");
  }
  const auto dudt = time_derivative(u);
  const bool forced = force.sup_abs() != 0.0;
  std::vector<double> norms;
  norms.reserve(u.slice_count());
  for (std::size_t j = 0; j < u.slice_count(); ++j) {
    PeriodicField r = dudt.slice(j);
    axpy(r.values(), 1.0, advection(u.slice(j), dealias).values());
    axpy(r.values(), -nu, spectral_laplacian(u.slice(j)).values());
    if (forced) axpy(r.values(), -1.0, slice_at(force, u.times()[j]).values());
    norms.push_back(l2_norm(r));
  }
  return norms;
}

}  // namespace burgers
