#include <doctest.h>

#include <cmath>
#include <sstream>

#include "burgers/burgers_oracle.hpp"
#include "burgers/diagnostics.hpp"
#include "burgers/error.hpp"

using namespace burgers;

namespace {

PeriodicField sine(const GridSpec& g, double a) {
  return PeriodicField::from_function(g, 1, [a](auto th, auto out) { out[0] = a * std::sin(th[0]); });
}

PeriodicField constant(const GridSpec& g, double c) {
  const double v[] = {c};
  return PeriodicField::constant(g, v);
}

SpaceTimeField frozen(const std::vector<double>& times, const PeriodicField& f) {
  return SpaceTimeField::constant_in_time(times, f);
}

}  // namespace

TEST_CASE("pde residual") {
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, 0.5, 10);
  const auto zero = frozen(times, PeriodicField(g, 1));
  const auto c = pde_residual(frozen(times, constant(g, 0.3)), constant(g, 0.3), zero, 0.1);
  CHECK(c.max <= 1e-12);
  CHECK(c.residual.pass);
  CHECK(c.terminal.pass);
  const auto wrong = pde_residual(frozen(times, constant(g, 0.3)), constant(g, 0.4), zero, 0.1);
  CHECK(!wrong.terminal.pass);
  CHECK(wrong.terminal_mismatch == doctest::Approx(0.1));
  CHECK_THROWS_AS(pde_residual(frozen({0.0, 0.5}, constant(g, 0.3)), constant(g, 0.3), zero, 0.1), InvalidInput);

  // oracle output at dt = 1e-3, N = 128
  const GridSpec g128(1, 128);
  const auto h = sine(g128, 0.5);
  const auto f0 = frozen({0.0, 0.5}, PeriodicField(g128, 1));
  const auto sol = solve_backward_burgers(h, f0, {g128, 0.1, 0.5, 1e-3, true, 0});
  const auto r = pde_residual(sol.field, h, frozen(sol.field.times(), PeriodicField(g128, 1)), 0.1);
  MESSAGE("oracle residual " << r.max);
  CHECK(r.residual.pass);
  CHECK(r.max <= 1e-5);
}

TEST_CASE("flow consistency in degenerate cases") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 8);
  const auto zero = frozen(times, PeriodicField(g, 1));
  const std::vector<double> probes{0.3, 1.7, 4.0};
  FlowConsistencyOptions o;
  o.outer_paths = 3;
  o.restart = {64, 5, NoiseMode::independent, false};
  const auto a = flow_consistency(zero, PeriodicField(g, 1), zero, 0.1, 0.0, 0.25, probes, o);
  CHECK(a.statistic == 0.0);
  CHECK(a.pass);
  const auto b = flow_consistency(frozen(times, constant(g, 0.3)), constant(g, 0.3), zero, 0.1, 0.0, 0.25, probes, o);
  CHECK(b.statistic == 0.0);
  CHECK(b.pass);
}

TEST_CASE("composition law in degenerate cases") {
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, 0.5, 8);
  const auto y = frozen(times, sine(g, 0.5));
  const auto id = composition_law(y, PeriodicField(g, 1), 0.1, 0.0, 8, 3);
  CHECK(id.statistic == 0.0);
  const auto xi = sine(g, 0.3);
  const auto zero_drift = composition_law(frozen(times, PeriodicField(g, 1)), xi, 0.1, 0.0, 8, 3);
  CHECK(zero_drift.statistic == 0.0);
  CHECK(composition_law(y, xi, 0.1, 0.0, 8, 3).statistic > 0.0);
  CHECK_THROWS_AS(require_diffeomorphism(sine(g, 1.5)), InvalidInput);
  CHECK_NOTHROW(require_diffeomorphism(xi));
}

TEST_CASE("bsde residual") {
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, 0.5, 16);
  const auto zero = frozen(times, PeriodicField(g, 1));
  const auto c = bsde_residual_study(frozen(times, constant(g, 0.3)), constant(g, 0.3), zero, 0.1, 8, 2);
  CHECK(c.rms <= 1e-12);
  CHECK(c.residual.pass);
  CHECK(c.martingale.pass);

  // time-frozen g with the forcing that makes it a stationary solution:
  // F = -(g g' + ν g'')
  const double nu = 0.1;
  auto frozen_rms = [&](int steps) {
    const auto t = uniform_times(0.0, 0.5, steps);
    const auto gfield = sine(g, 0.5);
    const auto force = PeriodicField::from_function(g, 1, [&](auto th, auto out) {
      const double s = std::sin(th[0]), co = std::cos(th[0]);
      out[0] = -(0.25 * s * co - nu * 0.5 * s);
    });
    return bsde_residual_study(frozen(t, gfield), gfield, frozen(t, force), nu, 16, 4).rms;
  };
  const double r1 = frozen_rms(32), r2 = frozen_rms(128);
  MESSAGE("frozen rms " << r1 << " " << r2);
  CHECK(r2 < r1);
}

TEST_CASE("determinism in degenerate cases") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 8);
  const auto zero = frozen(times, PeriodicField(g, 1));
  const std::vector<double> probes{1.0, 2.0};
  const std::vector<std::size_t> paths{16, 64};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  const auto a = determinism_check(zero, constant(g, 0.3), zero, 0.1, 0.0, probes, paths, seeds);
  CHECK(a.exact);
  CHECK(a.report.pass);
  CHECK(!a.slope);
  std::vector<std::uint64_t> few{1, 2, 3};
  CHECK_THROWS_AS(determinism_check(zero, constant(g, 0.3), zero, 0.1, 0.0, probes, paths, few), InvalidInput);
}

TEST_CASE("flow regularity") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 8);
  const auto acc = flow_regularity_study(frozen(times, constant(g, 0.2)), 0.1, 0.0, 20, 1, {2.0, 4.0}, 7);
  CHECK(acc.total_paths() == 20);
  CHECK(acc.positive_fraction() == 1.0);
  for (double m : acc.moments(1)) CHECK(m == doctest::Approx(1.0).epsilon(1e-14));
  const auto r = acc.report();
  CHECK(r.pass);
  CHECK(r.statistic == 0.0);
  // batching does not change anything
  const auto one = flow_regularity_study(frozen(times, sine(g, 0.5)), 0.1, 0.0, 20, 1, {2.0}, 20);
  const auto many = flow_regularity_study(frozen(times, sine(g, 0.5)), 0.1, 0.0, 20, 1, {2.0}, 3);
  CHECK(one.moments(0) == many.moments(0));
}

TEST_CASE("reports") {
  CheckReport a{"a", 1.0, 2.0, std::nullopt, true, {}};
  CheckReport b{"b", 3.0, 2.0, 0.5, false, {{"k", 1}}};
  const std::vector<CheckReport> v{a, b};
  CHECK(!all_pass(v));
  const auto j = to_json(std::span<const CheckReport>(v));
  CHECK(j.size() == 2);
  CHECK(j[1]["standard_error"] == 0.5);
  CHECK(j[0]["standard_error"].is_null());
  std::ostringstream os;
  print_table(os, v);
  CHECK(os.str().find("FAIL") != std::string::npos);
  const double x[] = {1, 2, 4, 8}, y[] = {3, 3 / std::sqrt(2.0), 1.5, 3 / std::sqrt(8.0)};
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-12));
}
