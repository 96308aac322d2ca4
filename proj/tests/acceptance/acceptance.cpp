// One PASS/FAIL line per acceptance criterion. Optional arguments select
// criteria by number, e.g. `acceptance 1 4 6`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "burgers/budget.hpp"
#include "burgers/burgers_oracle.hpp"
#include "burgers/diagnostics.hpp"
#include "burgers/parallel.hpp"
#include "burgers/picard.hpp"
#include "burgers/sde_engine.hpp"

using namespace burgers;
using nlohmann::json;

namespace {

constexpr double kNu = 0.1;
constexpr double kT = 0.5;

PeriodicField sine(const GridSpec& g, double a) {
  return PeriodicField::from_function(g, 1, [a](auto th, auto out) { out[0] = a * std::sin(th[0]); });
}

PeriodicField constant(const GridSpec& g, double c) {
  std::vector<double> v(g.dim(), c);
  return PeriodicField::constant(g, v);
}

SpaceTimeField zero_forcing(const GridSpec& g, const std::vector<double>& times) {
  return SpaceTimeField::constant_in_time(times, PeriodicField(g, g.dim()));
}

OracleSolution reference_oracle(const GridSpec& g, int steps, double dt = 1e-3) {
  return solve_backward_burgers(sine(g, 0.5), zero_forcing(g, {0.0, kT}), {g, kNu, kT, dt, true, steps});
}

double relative_error(const PicardResult& r, const OracleSolution& o) {
  return l2_distance(r.solution.slice(0), o.field.slice(0)) / l2_norm(o.field.slice(0));
}

std::vector<double> probes() {
  std::vector<double> p;
  for (int k = 0; k < 5; ++k) p.push_back(kTwoPi * (k + 0.5) / 5.0);
  return p;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// the reference Picard run is shared by criteria 2, 3, 5, 8 and 9
struct Reference {
  GridSpec grid{1, 128};
  std::vector<double> times = uniform_times(0.0, kT, 128);
  PicardOptions options{5e-3, 8, 64};
  std::unique_ptr<PicardResult> picard;
  std::unique_ptr<OracleSolution> oracle;

  const PicardResult& solve() {
    if (!picard) {
      picard = std::make_unique<PicardResult>(picard_solve(sine(grid, 0.5), zero_forcing(grid, times), kNu, times,
                                                           {20000, 1, NoiseMode::independent, false}, options));
    }
    return *picard;
  }
  const OracleSolution& exact() {
    if (!oracle) oracle = std::make_unique<OracleSolution>(reference_oracle(grid, 128));
    return *oracle;
  }
};

struct Verdict {
  bool pass;
  std::string detail;
};

Verdict criterion1(Reference&) {
  const auto start = std::chrono::steady_clock::now();
  const GridSpec g(1, 128);
  const auto sol = reference_oracle(g, 0);
  const auto u = time_reversal(sol.field, kT);
  double worst = 0.0;
  for (std::size_t j = 0; j < u.slice_count(); ++j) {
    worst = std::max(worst, sup_distance(u.slice(j), cole_hopf_solution(u.slice(0), kNu, u.times()[j])));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-8 && secs < 5.0, "max |spectral - Cole-Hopf| = " + fmt(worst) + " (<= 1e-8), " + fmt(secs) + " s (< 5)"};
}

Verdict criterion2(Reference& ref) {
  const double main_err = relative_error(ref.solve(), ref.exact());
  std::vector<double> ms{1000, 4000, 16000}, errs;
  for (double m : ms) {
    const auto r = picard_solve(sine(ref.grid, 0.5), zero_forcing(ref.grid, ref.times), kNu, ref.times,
                                {static_cast<std::size_t>(m), 1, NoiseMode::independent, false}, ref.options);
    errs.push_back(relative_error(r, ref.exact()));
  }
  const double slope = loglog_slope(ms, errs);
  std::string sweep;
  for (double e : errs) sweep += fmt(e) + " ";
  return {main_err <= 0.02 && std::abs(slope + 0.5) <= 0.2,
          "rel L2 at M=2e4 = " + fmt(main_err) + " (<= 0.02); sweep errors " + sweep + "slope " + fmt(slope) +
              " (-0.5 +- 0.2)"};
}

Verdict criterion3(Reference& ref) {
  const auto& r = ref.solve();
  const auto& d = r.state.diff_history;
  double worst = 0.0;
  std::string ratios;
  for (std::size_t k = 1; k < d.size(); ++k) {
    worst = std::max(worst, d[k] / d[k - 1]);
    ratios += fmt(d[k] / d[k - 1]) + " ";
  }
  const auto& b = r.budget;
  const bool budget_ok = std::abs(b.lipschitz - 0.5) < 1e-10 && b.t0 && std::abs(*b.t0 - 0.8526) < 1e-4 &&
                         std::abs(b.gamma - 0.412) < 1e-3 && kT < *b.t0;
  return {budget_ok && d.size() >= 2 && worst <= 0.6 && r.state.converged,
          "K = " + fmt(b.lipschitz) + ", gamma(T) = " + fmt(b.gamma) + ", T0 = " + fmt(b.t0.value_or(0)) +
              "; diff ratios " + ratios + "(<= 0.6)"};
}

Verdict criterion4(Reference&) {
  double worst = 0.0, zero = 0.0;
  for (int dim : {1, 2}) {
    const GridSpec g(dim, dim == 1 ? 64 : 16);
    const auto times = uniform_times(0.0, kT, 32);
    const auto f0 = zero_forcing(g, times);
    for (int stride : {1, 8}) {
      const auto c = picard_solve(constant(g, 0.3), f0, kNu, times, {64, 3, NoiseMode::independent, false},
                                  {5e-3, 8, stride});
      for (const auto& s : c.solution.slices())
        for (double v : s.values()) worst = std::max(worst, std::abs(v - 0.3));
      const auto z = picard_solve(PeriodicField(g, dim), f0, kNu, times, {64, 3, NoiseMode::common, false},
                                  {5e-3, 8, stride});
      zero = std::max({zero, z.solution.sup_abs(), z.state.standard_error.sup_abs()});
    }
  }
  // zero data through the oracle and the checks as well
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, kT, 16);
  const auto f0 = zero_forcing(g, times);
  zero = std::max(zero, solve_backward_burgers(PeriodicField(g, 1), f0, {g, kNu, kT, 1e-3, true, 16}).field.sup_abs());
  FlowConsistencyOptions fo;
  fo.restart.paths = 100;
  zero = std::max(zero, flow_consistency(f0, PeriodicField(g, 1), f0, kNu, 0.0, 0.25, probes(), fo).statistic);
  zero = std::max(zero, bsde_residual_study(f0, PeriodicField(g, 1), f0, kNu, 8, 1).rms);
  return {worst <= 1e-12 && zero == 0.0,
          "max |y - c| = " + fmt(worst) + " (<= 1e-12); zero data max = " + fmt(zero) + " (== 0)"};
}

Verdict criterion5(Reference& ref) {
  const auto& r = ref.solve();
  FlowConsistencyOptions o;
  o.outer_paths = 1;
  o.seed = 11;
  o.restart = {10000, 12, NoiseMode::independent, false};
  o.field_standard_error = r.state.standard_error;
  const auto rep = flow_consistency(r.solution, sine(ref.grid, 0.5), zero_forcing(ref.grid, ref.times), kNu, 0.0,
                                    ref.times[64], probes(), o);
  return {rep.pass, "max discrepancy " + fmt(rep.statistic) + " standard errors at 5 probes (<= 3)"};
}

Verdict criterion6(Reference&) {
  std::vector<double> stats;
  for (int n : {64, 128}) {
    const GridSpec g(1, n);
    const auto y = reference_oracle(g, 128).field;
    stats.push_back(composition_law(y, sine(g, 0.3), kNu, 0.0, 256, 5).statistic);
  }
  const GridSpec g(1, 64);
  const auto y = reference_oracle(g, 128).field;
  const double identity = composition_law(y, PeriodicField(g, 1), kNu, 0.0, 256, 5).statistic;
  const double drift_free = composition_law(zero_forcing(g, y.times()), sine(g, 0.3), kNu, 0.0, 256, 5).statistic;
  return {stats[1] < stats[0] && identity == 0.0 && drift_free == 0.0,
          "N=64: " + fmt(stats[0]) + ", N=128: " + fmt(stats[1]) + " (decreasing); identity " + fmt(identity) +
              ", zero drift " + fmt(drift_free) + " (== 0)"};
}

Verdict criterion7(Reference&) {
  const GridSpec g(1, 128);
  std::vector<double> dts, full, frozen;
  const auto h = sine(g, 0.5);
  const auto force = PeriodicField::from_function(g, 1, [](auto th, auto out) {
    const double s = std::sin(th[0]), c = std::cos(th[0]);
    out[0] = -(0.25 * s * c - kNu * 0.5 * s);
  });
  for (int steps : {64, 128, 256}) {
    const auto times = uniform_times(0.0, kT, steps);
    dts.push_back(kT / steps);
    full.push_back(bsde_residual_study(reference_oracle(g, steps).field, h, zero_forcing(g, times), kNu, 64, 7).rms);
    frozen.push_back(bsde_residual_study(SpaceTimeField::constant_in_time(times, h), h,
                                         SpaceTimeField::constant_in_time(times, force), kNu, 64, 7)
                         .rms);
  }
  const double s_full = loglog_slope(dts, full), s_frozen = loglog_slope(dts, frozen);
  const bool decreasing = full[1] < full[0] && full[2] < full[1];
  return {decreasing && s_full > 0.0 && s_frozen >= 0.4,
          "rms " + fmt(full[0]) + " " + fmt(full[1]) + " " + fmt(full[2]) + ", order " + fmt(s_full) +
              " (> 0); frozen order " + fmt(s_frozen) + " (>= 0.4)"};
}

Verdict criterion8(Reference& ref) {
  const auto& r = ref.solve();
  const std::vector<std::size_t> paths{1000, 4000, 16000};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 16; ++s) seeds.push_back(100 + s);
  const auto d = determinism_check(r.solution, sine(ref.grid, 0.5), zero_forcing(ref.grid, ref.times), kNu, 0.0,
                                   probes(), paths, seeds);
  return {d.report.pass && d.slope.has_value(),
          "variance slope " + fmt(d.slope.value_or(NAN)) + " (-1 +- 0.3) over M = 1e3, 4e3, 1.6e4 with 16 seeds"};
}

Verdict criterion9(Reference& ref) {
  const auto& y = ref.solve().solution;
  const auto reg = flow_regularity_study(y, kNu, 0.0, 10000, 9, {2.0, 4.0});
  const auto noise = sample_brownian(ref.times, 64, 1, NoiseMode::common, 9);
  const auto chars = integrate_forward(y, 0.0, ref.grid.identity_points(), noise, kNu);
  const auto tan = tangent_consistency(chars, integrate_tangent(y, chars));
  return {reg.positive_fraction() >= 0.999 && tan.pass,
          "positive fraction " + fmt(reg.positive_fraction()) + " of " + std::to_string(reg.total_paths()) +
              " (>= 0.999); tangent vs FD " + fmt(tan.statistic) + " (<= 1e-2)"};
}

// reduced versions of every criterion, serialized for bitwise comparison
std::string reduced_suite() {
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, kT, 32);
  const auto h = sine(g, 0.5);
  const auto f0 = zero_forcing(g, times);
  json out;
  const auto o = solve_backward_burgers(h, zero_forcing(g, {0.0, kT}), {g, kNu, kT, 1e-3, true, 32});
  out["oracle"] = fingerprint(o.field);
  out["cole_hopf"] = fingerprint(time_reversal(o.field, kT));
  const auto r = picard_solve(h, f0, kNu, times, {400, 3, NoiseMode::independent, false}, {5e-3, 8, 8});
  out["picard"] = {fingerprint(r.solution), fingerprint(r.state.standard_error), r.state.diff_history};
  const auto c = picard_solve(constant(g, 0.3), f0, kNu, times, {400, 3, NoiseMode::independent, true}, {});
  out["constant"] = fingerprint(c.solution);
  FlowConsistencyOptions fo;
  fo.restart = {500, 4, NoiseMode::independent, false};
  fo.field_standard_error = r.state.standard_error;
  out["flow"] = to_json(flow_consistency(r.solution, h, f0, kNu, 0.0, times[16], probes(), fo));
  out["composition"] = to_json(composition_law(r.solution, sine(g, 0.3), kNu, 0.0, 32, 5));
  const auto b = bsde_residual_study(r.solution, h, f0, kNu, 16, 6);
  out["bsde"] = {to_json(b.residual), to_json(b.martingale), b.rms_per_time};
  const std::vector<std::size_t> paths{100, 400};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  out["determinism"] = to_json(determinism_check(r.solution, h, f0, kNu, 0.0, probes(), paths, seeds).report);
  out["regularity"] = to_json(flow_regularity_study(r.solution, kNu, 0.0, 200, 9, {2.0, 4.0}, 64).report());
  const auto noise = sample_brownian(times, 16, 1, NoiseMode::common, 9);
  const auto chars = integrate_forward(r.solution, 0.0, g.identity_points(), noise, kNu);
  out["tangent"] = to_json(tangent_consistency(chars, integrate_tangent(r.solution, chars)));
  return out.dump();
}

Verdict criterion10(Reference&) {
  std::vector<std::string> runs;
  for (int n : {1, 4, 8}) {
    set_execution_threads(n);
    runs.push_back(reduced_suite());
  }
  set_execution_threads(1);
  const bool same = runs[0] == runs[1] && runs[0] == runs[2];
  return {same, std::string(same ? "identical" : "different") + " results for threads 1, 4, 8 (" +
                    std::to_string(runs[0].size()) + " bytes of serialized output)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  const std::vector<std::function<Verdict(Reference&)>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                                 criterion5, criterion6, criterion7, criterion8,
                                                                 criterion9, criterion10};
  set_execution_threads(1);
  Reference ref;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.contains(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i](ref);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s  %s  [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
