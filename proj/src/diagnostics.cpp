#include "burgers/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "burgers/error.hpp"
#include "burgers/parallel.hpp"
#include "burgers/spectral.hpp"

namespace burgers {

namespace {

std::size_t required_index(const SpaceTimeField& field, double s, const char* what) {
  const auto j = field.time_index(s);
  if (j < 0) {
    std::ostringstream msg;
    msg << what << " " << s << " is not a node of the field's time grid";
    throw InvalidInput(msg.str());
  }
  return static_cast<std::size_t>(j);
}

SpaceTimeField forcing_on(const SpaceTimeField& forcing, const SpaceTimeField& field) {
  return resample_in_time(forcing, field.times());
}

void require_velocity(const SpaceTimeField& y, const char* what) {
  if (y.components() != y.grid().dim()) {
    throw InvalidInput(std::string(what) + ": y must be a velocity field");
  }
}

// |a - b| in units of se; exact agreement counts as zero even when se = 0.
double z_score(double a, double b, double se) {
  const double diff = std::abs(a - b);
  if (diff <= 1e-12 * std::max(1.0, std::abs(b))) return 0.0;
  return se > 0.0 ? diff / se : INFINITY;
}

}  // namespace

nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json j;
  j["name"] = report.name;
  j["statistic"] = report.statistic;
  j["threshold"] = report.threshold;
  j["standard_error"] = report.standard_error ? nlohmann::json(*report.standard_error) : nlohmann::json();
  j["pass"] = report.pass;
  j["metadata"] = report.metadata;
  return j;
}

nlohmann::json to_json(std::span<const CheckReport> reports) {
  auto out = nlohmann::json::array();
  for (const auto& r : reports) out.push_back(to_json(r));
  return out;
}

void print_table(std::ostream& os, std::span<const CheckReport> reports) {
  os << std::left << std::setw(28) << "check" << std::right << std::setw(14) << "statistic"
     << std::setw(14) << "threshold" << std::setw(14) << "std.err" << "  result\n";
  for (const auto& r : reports) {
    os << std::left << std::setw(28) << r.name << std::right << std::scientific << std::setprecision(4)
       << std::setw(14) << r.statistic << std::setw(14) << r.threshold;
    if (r.standard_error) {
      os << std::setw(14) << *r.standard_error;
    } else {
      os << std::setw(14) << "-";
    }
    os << "  " << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  os << std::defaultfloat;
}

bool all_pass(std::span<const CheckReport> reports) noexcept {
  return std::ranges::all_of(reports, [](const CheckReport& r) { return r.pass; });
}

PdeResidual pde_residual(const SpaceTimeField& y, const PeriodicField& terminal,
                         const SpaceTimeField& forcing, double nu, double threshold,
                         double terminal_tolerance, bool dealias) {
  require_velocity(y, "pde_residual");
  if (y.slice_count() < 3) throw InvalidInput("pde_residual needs at least 3 time slices");
  if (terminal.grid() != y.grid() || terminal.components() != y.components()) {
    throw InvalidInput("pde_residual: terminal data does not match y");
  }
  const auto dyds = time_derivative(y);
  const auto f = forcing_on(forcing, y);
  PdeResidual out;
  out.per_time.resize(y.slice_count());
  for (std::size_t j = 0; j < y.slice_count(); ++j) {
    PeriodicField r = dyds.slice(j);
    auto v = r.values();
    const auto adv = advection(y.slice(j), dealias);
    const auto lap = spectral_laplacian(y.slice(j));
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] += adv.values()[k] + nu * lap.values()[k] + f.slice(j).values()[k];
    }
    out.per_time[j] = l2_norm(r);
  }
  out.max = *std::ranges::max_element(out.per_time);
  out.terminal_mismatch = sup_distance(y.slices().back(), terminal);

  nlohmann::json meta{{"nu", nu}, {"time_steps", y.step_count()}, {"points_per_axis", y.grid().points_per_axis()},
                      {"dim", y.grid().dim()}, {"dealias", dealias}};
  out.residual = {"pde_residual", out.max, threshold, std::nullopt, out.max <= threshold, meta};
  out.residual.metadata["per_time"] = out.per_time;
  out.terminal = {"terminal_condition", out.terminal_mismatch, terminal_tolerance, std::nullopt,
                  out.terminal_mismatch <= terminal_tolerance, meta};
  return out;
}

CheckReport flow_consistency(const SpaceTimeField& y, const PeriodicField& terminal,
                             const SpaceTimeField& forcing, double nu, double t, double u,
                             std::span<const double> probes, const FlowConsistencyOptions& options) {
  require_velocity(y, "flow_consistency");
  const int dim = y.grid().dim();
  if (!(t <= u)) throw InvalidInput("flow_consistency needs t <= u");
  const std::size_t jt = required_index(y, t, "flow_consistency: t");
  const std::size_t ju = required_index(y, u, "flow_consistency: u");
  if (probes.empty() || probes.size() % dim != 0) throw InvalidInput("flow_consistency: bad probe list");
  if (options.outer_paths < 1) throw InvalidInput("flow_consistency: outer_paths must be >= 1");
  if (options.restart.mode != NoiseMode::independent) {
    throw InvalidInput("flow_consistency: restarts must use independent noise");
  }
  if (options.field_standard_error &&
      (options.field_standard_error->times() != y.times() || options.field_standard_error->grid() != y.grid())) {
    throw InvalidInput("flow_consistency: standard-error field does not match y");
  }
  const std::size_t steps = y.step_count();
  const std::size_t probe_count = probes.size() / dim;

  const std::vector<double> times(y.times().begin() + jt, y.times().end());
  const auto noise = sample_brownian(times, options.outer_paths, dim, NoiseMode::common, options.seed);
  const auto chars = integrate_forward(y, t, probes, noise, nu);
  const auto f = forcing_on(forcing, y);
  const FeynmanKacSampler sampler(y, f, options.restart, nu);
  const FieldInterpolator terminal_field(terminal);
  const FieldInterpolator y_at_u(y.slice(ju));
  std::optional<FieldInterpolator> se_at_u;
  if (options.field_standard_error) se_at_u.emplace(options.field_standard_error->slice(ju));

  const std::size_t tasks = options.outer_paths * probe_count;
  std::vector<double> z_scores(tasks * dim), diffs(tasks * dim), ses(tasks * dim);
  parallel_for(tasks, [&](std::size_t task) {
    const std::size_t p = task / probe_count;
    const std::size_t i = task % probe_count;
    std::array<double, kMaxDim> z{}, lhs{}, lhs_se{}, rhs{}, rhs_se{};
    for (int a = 0; a < dim; ++a) z[a] = chars.position(p, i, ju - jt, a);
    const std::span<const double> point(z.data(), dim);
    y_at_u.evaluate(point, std::span<double>(lhs.data(), dim));
    if (se_at_u) se_at_u->evaluate(point, std::span<double>(lhs_se.data(), dim));
    if (ju == steps) {
      terminal_field.evaluate(point, std::span<double>(rhs.data(), dim));
    } else {
      sampler.estimate(ju, steps, point, terminal_field, task, tasks, std::span<double>(rhs.data(), dim),
                       std::span<double>(rhs_se.data(), dim));
    }
    for (int a = 0; a < dim; ++a) {
      const double se = std::hypot(std::abs(lhs_se[a]), rhs_se[a]);
      z_scores[task * dim + a] = z_score(lhs[a], rhs[a], se);
      diffs[task * dim + a] = lhs[a] - rhs[a];
      ses[task * dim + a] = se;
    }
  });

  const auto worst = std::ranges::max_element(z_scores);
  const double statistic = *worst;
  CheckReport report{"flow_consistency", statistic, options.confidence,
                     ses[static_cast<std::size_t>(worst - z_scores.begin())], statistic <= options.confidence, {}};
  report.metadata = {{"t", t},
                     {"u", u},
                     {"probes", std::vector<double>(probes.begin(), probes.end())},
                     {"outer_paths", options.outer_paths},
                     {"restart_paths", options.restart.paths},
                     {"seed", options.seed},
                     {"restart_seed", options.restart.seed},
                     {"differences", diffs},
                     {"standard_errors", ses},
                     {"note", "finitely many (u, probe) pairs are sampled"}};
  return report;
}

void require_diffeomorphism(const PeriodicField& displacement) {
  const auto& grid = displacement.grid();
  const int dim = grid.dim();
  if (displacement.components() != dim) throw InvalidInput("xi displacement must have dim components");
  displacement.require_finite("xi displacement");
  const auto grad = spectral_gradient(displacement);
  std::array<double, kMaxDim * kMaxDim> jac{};
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    for (int c = 0; c < dim; ++c) {
      for (int a = 0; a < dim; ++a) jac[c * dim + a] = (c == a ? 1.0 : 0.0) + grad.at(c * dim + a, node);
    }
    double det = 0.0;
    if (dim == 1) {
      det = jac[0];
    } else if (dim == 2) {
      det = jac[0] * jac[3] - jac[1] * jac[2];
    } else {
      det = jac[0] * (jac[4] * jac[8] - jac[5] * jac[7]) - jac[1] * (jac[3] * jac[8] - jac[5] * jac[6]) +
            jac[2] * (jac[3] * jac[7] - jac[4] * jac[6]);
    }
    if (!(det > 0.0)) {
      std::ostringstream msg;
      msg << "xi is not a diffeomorphism: grid Jacobian " << det << " at node " << node;
      throw InvalidInput(msg.str());
    }
  }
}

CheckReport composition_law(const SpaceTimeField& y, const PeriodicField& xi_displacement, double nu,
                            double t, std::size_t paths, std::uint64_t seed, double threshold,
                            Interpolation kind) {
  require_velocity(y, "composition_law");
  if (xi_displacement.grid() != y.grid()) throw InvalidInput("composition_law: xi and y use different grids");
  require_diffeomorphism(xi_displacement);
  const auto& grid = y.grid();
  const int dim = grid.dim();
  const std::size_t nodes = grid.node_count();
  const std::size_t jt = required_index(y, t, "composition_law: t");

  const auto identity = grid.identity_points();
  std::vector<double> xi(identity.size());
  for (std::size_t n = 0; n < nodes; ++n) {
    for (int a = 0; a < dim; ++a) xi[n * dim + a] = identity[n * dim + a] + xi_displacement.at(a, n);
  }
  const std::vector<double> times(y.times().begin() + jt, y.times().end());
  const auto noise = sample_brownian(times, paths, dim, NoiseMode::common, seed);
  const auto from_grid = integrate_forward(y, t, identity, noise, nu);
  const auto from_xi = integrate_forward(y, t, xi, noise, nu);
  const std::size_t steps = from_grid.step_count();

  std::vector<double> worst_per_path(paths, 0.0);
  std::vector<double> per_step(paths * (steps + 1), 0.0);
  parallel_for(paths, [&](std::size_t p) {
    PeriodicField flow(grid, dim);
    std::vector<double> predicted;
    for (std::size_t j = 0; j <= steps; ++j) {
      for (std::size_t n = 0; n < nodes; ++n) {
        const auto d = from_grid.displacement(p, n, j);
        for (int a = 0; a < dim; ++a) flow.at(a, n) = d[a];
      }
      predicted = compose(flow, xi, kind);
      double sum = 0.0;
      for (std::size_t n = 0; n < nodes; ++n) {
        for (int a = 0; a < dim; ++a) {
          const double expect = xi[n * dim + a] + predicted[n * dim + a];
          const double actual = from_xi.position(p, n, j, a);
          sum += (actual - expect) * (actual - expect);
        }
      }
      per_step[p * (steps + 1) + j] = std::sqrt(sum / static_cast<double>(nodes));
      worst_per_path[p] = std::max(worst_per_path[p], per_step[p * (steps + 1) + j]);
    }
  });
  const double statistic = *std::ranges::max_element(worst_per_path);
  std::vector<double> step_max(steps + 1, 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t j = 0; j <= steps; ++j) step_max[j] = std::max(step_max[j], per_step[p * (steps + 1) + j]);
  }
  CheckReport report{"composition_law", statistic, threshold, std::nullopt, statistic <= threshold, {}};
  report.metadata = {{"t", t},
                     {"paths", paths},
                     {"seed", seed},
                     {"points_per_axis", grid.points_per_axis()},
                     {"interpolation", kind == Interpolation::cubic_spline ? "cubic_spline" : "trigonometric"},
                     {"max_per_step", step_max}};
  return report;
}

BsdeResidual bsde_residual(const SpaceTimeField& y, const MatrixPathEnsemble& x,
                           const CharacteristicEnsemble& chars, const BrownianEnsemble& noise,
                           const PeriodicField& terminal, const SpaceTimeField& forcing, double nu,
                           double threshold) {
  require_velocity(y, "bsde_residual");
  const int dim = chars.dim();
  const std::size_t paths = chars.paths();
  const std::size_t starts = chars.start_count();
  const std::size_t steps = chars.step_count();
  const std::size_t j0 = chars.start_index();
  if (y.grid().dim() != dim || terminal.grid() != y.grid() || terminal.components() != dim) {
    throw InvalidInput("bsde_residual: field dimensions do not match the characteristics");
  }
  if (chars.drift_fingerprint() != fingerprint(y)) {
    throw InvalidInput("bsde_residual: characteristics were not driven by y");
  }
  if (x.paths() != paths || x.start_count() != starts || x.step_count() != steps || x.dim() != dim) {
    throw InvalidInput("bsde_residual: X ensemble does not match the characteristics");
  }
  if (noise.times() != chars.times() || noise.paths() != paths || noise.dim() != dim ||
      (noise.mode() == NoiseMode::independent && noise.start_count() != starts)) {
    throw InvalidInput("bsde_residual: noise ensemble does not match the characteristics");
  }
  if (chars.nu() != nu) throw InvalidInput("bsde_residual: viscosity differs from the characteristics'");

  const auto f = forcing_on(forcing, y);
  std::vector<FieldInterpolator> y_slices, f_slices;
  for (std::size_t j = 0; j <= steps; ++j) y_slices.emplace_back(y.slice(j0 + j));
  const bool forced = f.sup_abs() != 0.0;
  if (forced) {
    for (std::size_t j = 0; j <= steps; ++j) f_slices.emplace_back(f.slice(j0 + j));
  }
  const FieldInterpolator h(terminal);
  const double sigma = std::sqrt(2.0 * nu);
  const auto& times = chars.times();

  // Per path: squared residual per step summed over starts, and the
  // start-averaged martingale increment M_J - M_0.
  std::vector<double> sq(paths * steps, 0.0), increment(paths * dim, 0.0);
  parallel_for(paths, [&](std::size_t p) {
    std::array<double, kMaxDim> z{}, v{}, tail{}, m0{}, drift_sum{};
    std::vector<double> yv(steps * dim);
    for (std::size_t s = 0; s < starts; ++s) {
      drift_sum.fill(0.0);
      // y(t_j, Z_j) for every step, and Σ_{l<j} F Δt forwards.
      std::vector<double> fsum((steps + 1) * dim, 0.0);
      for (std::size_t j = 0; j <= steps; ++j) {
        for (int a = 0; a < dim; ++a) z[a] = chars.position(p, s, j, a);
        const std::span<const double> point(z.data(), dim);
        for (int a = 0; a < dim; ++a) fsum[j * dim + a] = drift_sum[a];
        if (j < steps) {
          y_slices[j].evaluate(point, std::span<double>(yv.data() + j * dim, dim));
          if (forced) {
            f_slices[j].evaluate(point, std::span<double>(v.data(), dim));
            for (int a = 0; a < dim; ++a) drift_sum[a] += v[a] * (times[j + 1] - times[j]);
          }
        } else {
          h.evaluate(point, std::span<double>(tail.data(), dim));
          // Martingale increment with y(T) replaced by its value y_slices[J].
          y_slices[j].evaluate(point, std::span<double>(v.data(), dim));
          for (int a = 0; a < dim; ++a) m0[a] = v[a] + fsum[j * dim + a] - yv[a];
        }
      }
      for (int a = 0; a < dim; ++a) increment[p * dim + a] += m0[a] / static_cast<double>(starts);
      // Backward accumulation of h(Z_T) + Σ_{l>=j} F Δt - σ Σ_{l>=j} X ΔW.
      for (std::size_t j = steps; j-- > 0;) {
        for (int a = 0; a < dim; ++a) z[a] = chars.position(p, s, j, a);
        const double dt = times[j + 1] - times[j];
        if (forced) {
          f_slices[j].evaluate(std::span<const double>(z.data(), dim), std::span<double>(v.data(), dim));
          for (int a = 0; a < dim; ++a) tail[a] += v[a] * dt;
        }
        const auto xm = x.matrix(p, s, j);
        const auto dw = noise.increment(p, s, j);
        double r2 = 0.0;
        for (int c = 0; c < dim; ++c) {
          double xdw = 0.0;
          for (int a = 0; a < dim; ++a) xdw += xm[c * dim + a] * dw[a];
          tail[c] -= sigma * xdw;
          const double r = yv[j * dim + c] - tail[c];
          r2 += r * r;
        }
        sq[p * steps + j] += r2;
      }
    }
  });

  BsdeResidual out;
  out.rms_per_time.assign(steps, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    double s = 0.0;
    for (std::size_t p = 0; p < paths; ++p) s += sq[p * steps + j];
    out.rms_per_time[j] = std::sqrt(s / static_cast<double>(paths * starts));
    total += s;
  }
  out.rms = std::sqrt(total / static_cast<double>(paths * starts * steps));
  nlohmann::json meta{{"paths", paths}, {"starts", starts}, {"time_steps", steps}, {"seed", noise.seed()},
                      {"nu", nu}, {"noise", std::string(to_string(noise.mode()))}};
  out.residual = {"bsde_residual", out.rms, threshold, std::nullopt, out.rms <= threshold, meta};
  out.residual.metadata["rms_per_time"] = out.rms_per_time;

  double worst = 0.0, worst_se = 0.0;
  for (int a = 0; a < dim; ++a) {
    double mean = 0.0;
    for (std::size_t p = 0; p < paths; ++p) mean += increment[p * dim + a];
    mean /= static_cast<double>(paths);
    double var = 0.0;
    for (std::size_t p = 0; p < paths; ++p) var += (increment[p * dim + a] - mean) * (increment[p * dim + a] - mean);
    const double se = paths > 1 ? std::sqrt(var / static_cast<double>(paths - 1) / static_cast<double>(paths)) : 0.0;
    const double z = z_score(mean, 0.0, se);
    if (z >= worst) {
      worst = z;
      worst_se = se;
    }
  }
  out.martingale = {"bsde_martingale", worst, 3.0, worst_se, worst <= 3.0, meta};
  return out;
}

BsdeResidual bsde_residual_study(const SpaceTimeField& y, const PeriodicField& terminal,
                                 const SpaceTimeField& forcing, double nu, std::size_t paths,
                                 std::uint64_t seed, double threshold) {
  require_velocity(y, "bsde_residual_study");
  const auto noise = sample_brownian(y.times(), paths, y.grid().dim(), NoiseMode::common, seed);
  const auto chars = integrate_forward(y, y.start_time(), y.grid().identity_points(), noise, nu);
  const auto x = martingale_integrand(y, chars, nu);
  return bsde_residual(y, x, chars, noise, terminal, forcing, nu, threshold);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("slope fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  if (sxx == 0.0) throw InvalidInput("slope fit needs distinct x values");
  return sxy / sxx;
}

DeterminismStudy determinism_check(const SpaceTimeField& drift, const PeriodicField& terminal,
                                   const SpaceTimeField& forcing, double nu, double t,
                                   std::span<const double> probes,
                                   std::span<const std::size_t> path_counts,
                                   std::span<const std::uint64_t> seeds) {
  require_velocity(drift, "determinism_check");
  const int dim = drift.grid().dim();
  if (path_counts.size() < 2) throw InvalidInput("determinism_check needs at least two path counts");
  if (seeds.size() < 8) throw InvalidInput("determinism_check needs at least 8 seeds");
  if (probes.empty() || probes.size() % dim != 0) throw InvalidInput("determinism_check: bad probe list");
  const std::size_t jt = required_index(drift, t, "determinism_check: t");
  const std::size_t steps = drift.step_count();
  const std::size_t probe_count = probes.size() / dim;
  const auto f = forcing_on(forcing, drift);
  const FieldInterpolator h(terminal);

  DeterminismStudy out;
  out.paths.assign(path_counts.begin(), path_counts.end());
  for (std::size_t m : path_counts) {
    if (m < 2) throw InvalidInput("determinism_check: path counts must be >= 2");
    // estimates[seed][probe][component]
    std::vector<double> est(seeds.size() * probe_count * dim);
    parallel_for(seeds.size() * probe_count, [&](std::size_t task) {
      const std::size_t si = task / probe_count;
      const std::size_t i = task % probe_count;
      const FeynmanKacSampler sampler(drift, f, McConfig{m, seeds[si], NoiseMode::independent, false}, nu);
      std::array<double, kMaxDim> mean{}, se{};
      if (jt == steps) {
        h.evaluate(probes.subspan(i * dim, dim), std::span<double>(mean.data(), dim));
      } else {
        sampler.estimate(jt, steps, probes.subspan(i * dim, dim), h, i, probe_count,
                         std::span<double>(mean.data(), dim), std::span<double>(se.data(), dim));
      }
      for (int a = 0; a < dim; ++a) est[task * dim + a] = mean[a];
    });
    double var_sum = 0.0;
    for (std::size_t i = 0; i < probe_count; ++i) {
      for (int a = 0; a < dim; ++a) {
        double mean = 0.0;
        for (std::size_t si = 0; si < seeds.size(); ++si) mean += est[(si * probe_count + i) * dim + a];
        mean /= static_cast<double>(seeds.size());
        double var = 0.0;
        for (std::size_t si = 0; si < seeds.size(); ++si) {
          const double d = est[(si * probe_count + i) * dim + a] - mean;
          var += d * d;
        }
        var_sum += var / static_cast<double>(seeds.size() - 1);
      }
    }
    // Rounding in the running mean leaves ~1e-32 of spurious variance.
    const double v = var_sum / static_cast<double>(probe_count * dim);
    out.variance.push_back(v <= 1e-28 ? 0.0 : v);
  }

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < out.paths.size(); ++k) {
    if (out.variance[k] > 0.0) {
      xs.push_back(static_cast<double>(out.paths[k]));
      ys.push_back(out.variance[k]);
    }
  }
  out.exact = xs.empty();
  if (xs.size() >= 2) out.slope = loglog_slope(xs, ys);

  out.report.name = "determinism";
  out.report.threshold = 0.3;
  if (out.exact) {
    out.report.statistic = 0.0;
    out.report.pass = true;
  } else if (out.slope) {
    out.report.statistic = std::abs(*out.slope + 1.0);
    out.report.pass = out.report.statistic <= 0.3;
  } else {
    out.report.statistic = INFINITY;
    out.report.pass = false;
  }
  std::vector<std::uint64_t> seed_list(seeds.begin(), seeds.end());
  out.report.metadata = {{"t", t},
                         {"paths", out.paths},
                         {"variance", out.variance},
                         {"slope", out.slope ? nlohmann::json(*out.slope) : nlohmann::json()},
                         {"exact", out.exact},
                         {"seeds", seed_list},
                         {"statistic", "|slope + 1|"}};
  return out;
}

FlowRegularity::FlowRegularity(std::vector<double> p_values, std::size_t steps)
    : p_(std::move(p_values)), steps_(steps), sums_(p_.size() * (steps + 1), 0.0) {
  for (double p : p_) {
    if (!(p > 0.0)) throw InvalidInput("moment orders must be positive");
  }
}

void FlowRegularity::add(const CharacteristicEnsemble& chars, const TangentEnsemble& tangent) {
  const int dim = chars.dim();
  const std::size_t paths = chars.paths();
  const std::size_t starts = chars.start_count();
  if (chars.step_count() != steps_ || tangent.step_count() != steps_ || tangent.paths() != paths ||
      tangent.start_count() != starts || tangent.dim() != dim) {
    throw InvalidInput("flow regularity: ensembles do not match");
  }
  const std::size_t block = static_cast<std::size_t>(dim) * dim;
  std::vector<double> local(paths * p_.size() * (steps_ + 1), 0.0);
  std::vector<char> positive(paths, 1);
  parallel_for(paths, [&](std::size_t path) {
    for (std::size_t j = 0; j <= steps_; ++j) {
      for (std::size_t s = 0; s < starts; ++s) {
        const auto m = tangent.matrix(path, s, j);
        double norm2 = 0.0;
        for (std::size_t k = 0; k < block; ++k) norm2 += m[k] * m[k];
        const double norm = std::sqrt(norm2);
        for (std::size_t k = 0; k < p_.size(); ++k) {
          local[(path * p_.size() + k) * (steps_ + 1) + j] += std::pow(norm, p_[k]);
        }
      }
      if (dim == 1 && starts > 1) {
        // Consecutive starts around the circle, the last one wrapping by 2π.
        for (std::size_t s = 0; s < starts; ++s) {
          const double lo = chars.position(path, s, j, 0);
          const double hi = s + 1 < starts ? chars.position(path, s + 1, j, 0)
                                           : chars.position(path, 0, j, 0) + kTwoPi;
          if (!(hi - lo > 0.0)) positive[path] = 0;
        }
      }
    }
  });
  for (std::size_t path = 0; path < paths; ++path) {
    for (std::size_t k = 0; k < p_.size(); ++k) {
      for (std::size_t j = 0; j <= steps_; ++j) {
        sums_[k * (steps_ + 1) + j] += local[(path * p_.size() + k) * (steps_ + 1) + j];
      }
    }
  }
  samples_ += paths * starts;
  total_ += paths;
  if (dim == 1 && starts > 1) {
    positivity_checked_ = true;
    positive_ += static_cast<std::size_t>(std::count(positive.begin(), positive.end(), 1));
  }
}

double FlowRegularity::positive_fraction() const noexcept {
  return total_ == 0 ? 0.0 : static_cast<double>(positive_) / static_cast<double>(total_);
}

std::vector<double> FlowRegularity::moments(std::size_t k) const {
  std::vector<double> out(steps_ + 1);
  for (std::size_t j = 0; j <= steps_; ++j) {
    out[j] = samples_ == 0 ? 0.0 : sums_[k * (steps_ + 1) + j] / static_cast<double>(samples_);
  }
  return out;
}

CheckReport FlowRegularity::report(double threshold) const {
  CheckReport r;
  r.name = "flow_regularity";
  // Reported as 1 - fraction so that pass means statistic <= threshold.
  r.statistic = positivity_checked_ ? 1.0 - positive_fraction() : 0.0;
  r.threshold = 1.0 - threshold;
  r.pass = !positivity_checked_ || positive_fraction() >= threshold;
  nlohmann::json moments_json = nlohmann::json::object();
  for (std::size_t k = 0; k < p_.size(); ++k) {
    const auto m = moments(k);
    std::vector<double> running(m.size());
    std::partial_sum(m.begin(), m.end(), running.begin(), [](double a, double b) { return std::max(a, b); });
    moments_json["p=" + std::to_string(p_[k])] = {{"per_step", m}, {"running_max", running}};
  }
  r.metadata = {{"paths", total_},
                {"positive_paths", positive_},
                {"positive_fraction", positive_fraction()},
                {"positivity_checked", positivity_checked_},
                {"statistic", "1 - positive fraction"},
                {"moments", moments_json}};
  return r;
}

FlowRegularity flow_regularity_study(const SpaceTimeField& drift, double nu, double t,
                                     std::size_t paths, std::uint64_t seed,
                                     std::vector<double> p_values, std::size_t batch) {
  require_velocity(drift, "flow_regularity_study");
  if (batch < 1) throw InvalidInput("flow regularity batch must be >= 1");
  const std::size_t jt = required_index(drift, t, "flow_regularity: t");
  const std::vector<double> times(drift.times().begin() + jt, drift.times().end());
  FlowRegularity acc(std::move(p_values), times.size() - 1);
  const auto starts = drift.grid().identity_points();
  for (std::size_t first = 0; first < paths; first += batch) {
    const std::size_t count = std::min(batch, paths - first);
    BrownianOptions opt;
    opt.first_path = first;
    const auto noise = sample_brownian(times, count, drift.grid().dim(), NoiseMode::common, seed, opt);
    const auto chars = integrate_forward(drift, t, starts, noise, nu);
    acc.add(chars, integrate_tangent(drift, chars));
  }
  return acc;
}

CheckReport tangent_consistency(const CharacteristicEnsemble& chars, const TangentEnsemble& tangent,
                                double threshold) {
  if (chars.dim() != 1) throw InvalidInput("tangent_consistency is defined for 1-D flows");
  const std::size_t paths = chars.paths();
  const std::size_t starts = chars.start_count();
  const std::size_t steps = chars.step_count();
  if (starts < 3 || tangent.paths() != paths || tangent.start_count() != starts || tangent.step_count() != steps) {
    throw InvalidInput("tangent_consistency: ensembles do not match");
  }
  const auto sp = chars.start_points();
  const double h = (sp[1] - sp[0]);
  for (std::size_t s = 1; s < starts; ++s) {
    if (std::abs((sp[s] - sp[s - 1]) - h) > 1e-12 || std::abs(h * static_cast<double>(starts) - kTwoPi) > 1e-9) {
      throw InvalidInput("tangent_consistency needs the flow started from the full uniform grid");
    }
  }
  std::vector<double> worst(paths, 0.0);
  parallel_for(paths, [&](std::size_t p) {
    for (std::size_t j = 0; j <= steps; ++j) {
      for (std::size_t s = 0; s < starts; ++s) {
        const std::size_t up = (s + 1) % starts;
        const std::size_t down = (s + starts - 1) % starts;
        const double hi = chars.position(p, up, j, 0) + (up == 0 ? kTwoPi : 0.0);
        const double lo = chars.position(p, down, j, 0) - (s == 0 ? kTwoPi : 0.0);
        const double fd = (hi - lo) / (2.0 * h);
        const double dz = tangent.matrix(p, s, j)[0];
        worst[p] = std::max(worst[p], std::abs(dz - fd) / std::max(std::abs(dz), 1e-300));
      }
    }
  });
  const double statistic = *std::ranges::max_element(worst);
  CheckReport r{"tangent_flow", statistic, threshold, std::nullopt, statistic <= threshold, {}};
  r.metadata = {{"paths", paths}, {"starts", starts}, {"statistic", "max relative difference"}};
  return r;
}

}  // namespace burgers
