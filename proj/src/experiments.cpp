#include "burgers/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "burgers/error.hpp"
#include "burgers/field_io.hpp"
#include "burgers/parallel.hpp"
#include "burgers/sde_engine.hpp"
#include "burgers/spectral.hpp"

namespace burgers {

namespace {

using nlohmann::json;

std::filesystem::path out_dir(const ExperimentConfig& c, const RunOptions& o) {
  return o.out.empty() ? std::filesystem::path(c.outputs.directory) : o.out;
}

bool wants(const ExperimentConfig& c, const char* format) {
  return std::find(c.outputs.formats.begin(), c.outputs.formats.end(), format) != c.outputs.formats.end();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// everything that may differ between identical runs lives here
json run_info(const std::vector<double>& seconds = {}) {
  return {{"timestamp", utc_timestamp()}, {"threads", execution_threads()}, {"iteration_seconds", seconds}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json budget_json(const ContractionBudget& b) {
  return {{"K", b.lipschitz},
          {"T", b.horizon},
          {"gamma", b.gamma},
          {"T0", b.t0 ? json(*b.t0) : json(nullptr)},
          {"contracts", b.contracts()}};
}

void write_field(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& stem,
                 const SpaceTimeField& field) {
  if (wants(c, "csv")) write_spacetime_csv(dir / (stem + ".csv"), field);
  if (wants(c, "binary")) write_spacetime_binary(dir / stem, field);
}

std::filesystem::path prepare(const ExperimentConfig& c, const RunOptions& o) {
  const auto dir = out_dir(c, o);
  if (o.write) {
    std::filesystem::create_directories(dir);
    write_json(dir / "config.json", to_json(c));
  }
  return dir;
}

std::vector<double> probe_points(const ExperimentConfig& c) {
  if (!c.diagnostics.probes.empty()) return c.diagnostics.probes;
  const int dim = c.problem.dim;
  std::vector<double> p;
  for (int k = 0; k < 5; ++k) {
    for (int a = 0; a < dim; ++a) p.push_back(std::fmod(kTwoPi * (k + 0.5) / 5.0 + 0.7 * a, kTwoPi));
  }
  return p;
}

bool selected(const ExperimentConfig& c, const char* name) {
  const auto& list = c.diagnostics.checks;
  return list.empty() || std::find(list.begin(), list.end(), name) != list.end();
}

void warn_regularity(const ExperimentConfig& c, std::ostream* log) {
  if (log && c.problem.alpha <= c.problem.dim / 2.0 + 2.0) {
    *log << "warning: alpha = " << c.problem.alpha << " <= n/2 + 2; the data may lack the regularity the theory needs\n";
  }
}

}  // namespace

Problem make_problem(const ExperimentConfig& c, const std::filesystem::path& base) {
  GridSpec grid(c.problem.dim, c.grid.points_per_axis);
  auto times = uniform_times(0.0, c.problem.horizon, c.grid.time_steps);
  auto terminal = realize(c.problem.terminal, grid, base);
  auto forcing = SpaceTimeField::constant_in_time(times, realize(c.problem.forcing, grid, base));
  return Problem{grid, std::move(times), std::move(terminal), std::move(forcing)};
}

OracleConfig oracle_config(const ExperimentConfig& c) {
  OracleConfig o;
  o.grid = GridSpec(c.problem.dim, c.grid.points_per_axis);
  o.nu = c.problem.nu;
  o.horizon = c.problem.horizon;
  o.dt = c.oracle.dt;
  o.dealias = c.oracle.dealias;
  o.output_steps = c.grid.time_steps;
  return o;
}

McConfig mc_config(const ExperimentConfig& c) {
  return McConfig{c.mc.paths, c.mc.seed, c.mc.mode, c.mc.antithetic};
}

ContractionBudget problem_budget(const ExperimentConfig& c, const std::filesystem::path& base) {
  const auto p = make_problem(c, base);
  return contraction_budget(lipschitz_budget(p.terminal, p.forcing), c.problem.horizon);
}

void print_budget(std::ostream& os, const ContractionBudget& b) {
  os << std::setprecision(6) << "K = " << b.lipschitz << "  gamma(T) = " << b.gamma << "  T0 = ";
  if (b.t0) {
    os << *b.t0;
  } else {
    os << "inf";
  }
  os << '\n';
}

std::vector<CheckReport> run_diagnostic_suite(const ExperimentConfig& c, const Problem& p,
                                              const PicardResult& picard) {
  const auto& d = c.diagnostics;
  const auto& y = picard.solution;
  const double nu = c.problem.nu;
  const std::uint64_t seed = c.mc.seed;
  const std::size_t j0 = static_cast<std::size_t>(d.probe_step);
  const double t = p.times[j0];
  const auto probes = probe_points(c);
  std::vector<CheckReport> out;
  auto push = [&](CheckReport r) {
    r.metadata["seed"] = seed;
    out.push_back(std::move(r));
  };

  if (selected(c, "pde_residual")) {
    // MC noise swamps a finite-difference ∂_s, so the residual is taken on the oracle field
    auto oc = oracle_config(c);
    oc.output_steps = 0;
    const auto oracle = solve_backward_burgers(p.terminal, p.forcing, oc);
    const auto forcing = SpaceTimeField::constant_in_time(oracle.field.times(), p.forcing.slice(0));
    auto r = pde_residual(oracle.field, p.terminal, forcing, nu, d.pde_threshold);
    r.residual.metadata["field"] = "oracle";
    push(std::move(r.residual));
    push(std::move(r.terminal));
  }
  if (selected(c, "flow_consistency") && j0 + 1 < p.times.size()) {
    FlowConsistencyOptions fo;
    fo.outer_paths = d.outer_paths;
    fo.seed = seed;
    fo.restart = McConfig{d.restart_paths, seed + 1, NoiseMode::independent, false};
    fo.field_standard_error = picard.state.standard_error;
    const std::size_t ju = j0 + (p.times.size() - 1 - j0) / 2;
    push(flow_consistency(y, p.terminal, p.forcing, nu, t, p.times[ju], probes, fo));
  }
  if (selected(c, "composition_law")) {
    const auto xi = PeriodicField::from_function(p.grid, p.grid.dim(), [](std::span<const double> th, std::span<double> v) {
      for (std::size_t a = 0; a < v.size(); ++a) v[a] = 0.3 * std::sin(th[a]);
    });
    push(composition_law(y, xi, nu, t, d.flow_paths, seed, d.composition_threshold));
  }
  if (selected(c, "bsde_residual")) {
    auto r = bsde_residual_study(y, p.terminal, p.forcing, nu, d.bsde_paths, seed, d.bsde_threshold);
    push(std::move(r.residual));
    push(std::move(r.martingale));
  }
  if (selected(c, "determinism")) {
    std::vector<std::uint64_t> seeds(d.determinism_seeds);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = seed + i;
    push(determinism_check(y, p.terminal, p.forcing, nu, t, probes, d.determinism_paths, seeds).report);
  }
  if (selected(c, "flow_regularity")) {
    push(flow_regularity_study(y, nu, t, d.flow_paths, seed, d.moment_orders).report());
  }
  if (selected(c, "tangent_flow") && p.grid.dim() == 1) {
    const std::vector<double> times(p.times.begin() + static_cast<std::ptrdiff_t>(j0), p.times.end());
    const auto noise = sample_brownian(times, std::min<std::size_t>(d.flow_paths, 64), 1, NoiseMode::common, seed);
    const auto chars = integrate_forward(y, t, p.grid.identity_points(), noise, nu);
    push(tangent_consistency(chars, integrate_tangent(y, chars)));
  }
  return out;
}

SolveOutcome run_solve(const ExperimentConfig& c, const RunOptions& o) {
  const auto dir = prepare(c, o);
  const auto p = make_problem(c, o.base);
  warn_regularity(c, o.log);
  PicardOptions po;
  po.tol = c.picard.tol;
  po.max_iter = c.picard.max_iter;
  po.restart_stride = c.picard.restart_stride;
  SolveOutcome r{picard_solve(p.terminal, p.forcing, c.problem.nu, p.times, mc_config(c), po), {}, true};
  const auto& st = r.picard.state;
  if (o.log) {
    print_budget(*o.log, r.picard.budget);
    for (const auto& w : st.warnings) *o.log << "warning: " << w << '\n';
    *o.log << "picard: " << st.k << " iterations, " << (st.converged ? "converged" : "not converged") << '\n';
  }
  if (c.diagnostics.enabled) {
    r.diagnostics = run_diagnostic_suite(c, p, r.picard);
    r.diagnostics_pass = all_pass(r.diagnostics);
    if (o.log) print_table(*o.log, r.diagnostics);
  }
  if (o.write) {
    write_field(c, dir, "field", r.picard.solution);
    write_field(c, dir, "standard_error", st.standard_error);
    write_json(dir / "solver_report.json", {{"budget", budget_json(r.picard.budget)},
                                            {"iterations", st.k},
                                            {"converged", st.converged},
                                            {"diff_history", st.diff_history},
                                            {"warnings", st.warnings},
                                            {"sup_standard_error", st.standard_error.sup_abs()},
                                            {"sobolev_norms",
                                             {{"alpha", c.problem.alpha},
                                              {"h", sobolev_norm(p.terminal, c.problem.alpha)},
                                              {"F", sobolev_norm(p.forcing.slice(0), c.problem.alpha)},
                                              {"y0", sobolev_norm(r.picard.solution.slice(0), c.problem.alpha)}}},
                                            {"run_info", run_info(st.iteration_seconds)}});
    if (c.diagnostics.enabled) {
      write_json(dir / "diagnostics.json",
                 {{"pass", r.diagnostics_pass}, {"checks", to_json(std::span<const CheckReport>(r.diagnostics))}});
    }
  }
  return r;
}

SolveOutcome run_diagnose(const ExperimentConfig& config, const RunOptions& o) {
  auto c = config;
  c.diagnostics.enabled = true;
  return run_solve(c, o);
}

OracleSolution run_oracle(const ExperimentConfig& c, const RunOptions& o) {
  const auto dir = prepare(c, o);
  const auto p = make_problem(c, o.base);
  auto sol = solve_backward_burgers(p.terminal, p.forcing, oracle_config(c));
  if (o.log) *o.log << "oracle: step " << sol.step << ", " << sol.substeps << " substeps per output interval\n";
  if (o.write) {
    write_field(c, dir, "oracle_field", sol.field);
    const auto forcing = SpaceTimeField::constant_in_time(sol.field.times(), p.forcing.slice(0));
    std::vector<double> residual;
    if (sol.field.slice_count() >= 3) {
      residual = pde_residual(sol.field, p.terminal, forcing, c.problem.nu, c.diagnostics.pde_threshold, 1e-12,
                              c.oracle.dealias).per_time;
    }
    write_json(dir / "oracle_report.json", {{"step", sol.step},
                                            {"substeps", sol.substeps},
                                            {"energy", sol.energy},
                                            {"energy_monotone", sol.energy_monotone},
                                            {"pde_residual", residual},
                                            {"run_info", run_info()}});
  }
  return sol;
}

CompareOutcome run_compare(const ExperimentConfig& c, const RunOptions& o) {
  const auto dir = prepare(c, o);
  RunOptions inner = o;
  inner.write = false;
  auto oracle = run_oracle(c, inner);
  CompareOutcome r{{}, {}, {}, 0.0, run_solve(c, inner).picard, std::move(oracle)};
  r.times = r.picard.solution.times();
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    const auto ref = slice_at(r.oracle.field, r.times[j]);
    r.l2.push_back(l2_distance(r.picard.solution.slice(j), ref));
    r.linf.push_back(sup_distance(r.picard.solution.slice(j), ref));
  }
  const double norm0 = l2_norm(slice_at(r.oracle.field, r.times.front()));
  r.relative_l2 = norm0 > 0.0 ? r.l2.front() / norm0 : r.l2.front();
  if (o.log) *o.log << std::setprecision(6) << "relative L2 error at s = 0: " << r.relative_l2 << '\n';
  if (o.write) {
    std::ofstream csv(dir / "comparison.csv");
    csv << "time_index,time,l2,linf\n" << std::setprecision(17);
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      csv << j << ',' << r.times[j] << ',' << r.l2[j] << ',' << r.linf[j] << '\n';
    }
    write_json(dir / "compare_summary.json",
               {{"relative_l2_s0", r.relative_l2},
                {"max_l2", *std::max_element(r.l2.begin(), r.l2.end())},
                {"max_linf", *std::max_element(r.linf.begin(), r.linf.end())},
                {"paths", c.mc.paths},
                {"iterations", r.picard.state.k},
                {"converged", r.picard.state.converged},
                {"budget", budget_json(r.picard.budget)},
                {"run_info", run_info(r.picard.state.iteration_seconds)}});
  }
  return r;
}

ConvergenceOutcome run_convergence(const ExperimentConfig& c, const RunOptions& o) {
  const auto& sw = c.sweep;
  if (sw.parameter.empty()) throw ConfigError("sweep.parameter", "required for a convergence study");
  if (sw.values.size() < 3) throw ConfigError("sweep.values", "needs at least 3 points");
  for (double v : sw.values) {
    if (sw.parameter != "dt" && v != std::floor(v)) throw ConfigError("sweep.values", "M and N must be integers");
  }
  const auto dir = prepare(c, o);
  RunOptions inner = o;
  inner.write = false;
  inner.log = nullptr;
  ConvergenceOutcome r{sw.parameter, {}, {}, 0.0};
  std::vector<double> steps;

  if (sw.parameter == "dt") {
    auto ref_cfg = c;
    ref_cfg.oracle.dt = *std::min_element(sw.values.begin(), sw.values.end()) / 4.0;
    const auto ref = run_oracle(ref_cfg, inner);
    for (double dt : sw.values) {
      auto cc = c;
      cc.oracle.dt = dt;
      const auto sol = run_oracle(cc, inner);
      double err = 0.0;
      for (std::size_t j = 0; j < sol.field.slice_count(); ++j) {
        err = std::max(err, sup_distance(sol.field.slice(j), ref.field.slice(j)));
      }
      r.values.push_back(dt);
      steps.push_back(sol.step);
      r.errors.push_back(err);
    }
  } else {
    for (double v : sw.values) {
      auto cc = c;
      if (sw.parameter == "M") cc.mc.paths = static_cast<std::size_t>(v);
      if (sw.parameter == "N") cc.grid.points_per_axis = static_cast<int>(v);
      const auto cmp = run_compare(cc, inner);
      r.values.push_back(v);
      steps.push_back(v);
      r.errors.push_back(cmp.relative_l2);
      if (o.log) *o.log << sw.parameter << " = " << v << ": relative L2 " << cmp.relative_l2 << '\n';
    }
  }
  std::vector<double> xs, es;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (r.errors[i] > 0.0) {
      // dt is fitted against the number of steps per unit time, so refinement reads as a negative slope
      xs.push_back(sw.parameter == "dt" ? 1.0 / steps[i] : steps[i]);
      es.push_back(r.errors[i]);
    }
  }
  r.slope = xs.size() >= 2 ? loglog_slope(xs, es) : 0.0;
  if (o.log) *o.log << std::setprecision(6) << "fitted slope: " << r.slope << '\n';
  if (o.write) {
    std::ofstream csv(dir / "convergence.csv");
    csv << sw.parameter << ",effective,error\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.values.size(); ++i) csv << r.values[i] << ',' << steps[i] << ',' << r.errors[i] << '\n';
    write_json(dir / "convergence.json", {{"parameter", sw.parameter},
                                          {"values", r.values},
                                          {"effective", steps},
                                          {"errors", r.errors},
                                          {"slope", r.slope},
                                          {"run_info", run_info()}});
  }
  return r;
}

}  // namespace burgers
