#include <doctest.h>

#include <cmath>

#include "burgers/burgers_oracle.hpp"
#include "burgers/error.hpp"
#include "burgers/parallel.hpp"
#include "burgers/picard.hpp"

using namespace burgers;

namespace {

PeriodicField sine(const GridSpec& g, double a) {
  return PeriodicField::from_function(g, 1, [a](auto th, auto out) { out[0] = a * std::sin(th[0]); });
}

PeriodicField constant(const GridSpec& g, double c) {
  const double v[] = {c};
  return PeriodicField::constant(g, v);
}

}  // namespace

TEST_CASE("constant terminal data is reproduced") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 8);
  const auto forcing = SpaceTimeField::constant_in_time(times, PeriodicField(g, 1));
  for (int stride : {1, 3}) {
    const auto r = picard_solve(constant(g, 0.3), forcing, 0.1, times, {200, 5, NoiseMode::independent, false},
                                {5e-3, 8, stride});
    CHECK(r.state.converged);
    for (const auto& s : r.solution.slices())
      for (double v : s.values()) CHECK(std::abs(v - 0.3) <= 1e-12);
    CHECK(r.budget.lipschitz == 0.0);
  }
}

TEST_CASE("zero data stays zero") {
  const GridSpec g(2, 8);
  const auto times = uniform_times(0.0, 0.5, 4);
  const auto forcing = SpaceTimeField::constant_in_time(times, PeriodicField(g, 2));
  const auto r = picard_solve(PeriodicField(g, 2), forcing, 0.1, times, {50, 1, NoiseMode::common, false}, {});
  CHECK(r.solution.sup_abs() == 0.0);
  CHECK(r.state.standard_error.sup_abs() == 0.0);
  CHECK(r.state.diff_history.front() == 0.0);
}

TEST_CASE("constant forcing accumulates linearly") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 8);
  const auto forcing = SpaceTimeField::constant_in_time(times, constant(g, 0.2));
  const auto r = picard_solve(PeriodicField(g, 1), forcing, 0.1, times, {64, 3, NoiseMode::independent, true},
                              {5e-3, 8, 2});
  for (std::size_t j = 0; j < times.size(); ++j)
    for (double v : r.solution.slice(j).values()) CHECK(std::abs(v - 0.2 * (0.5 - times[j])) <= 1e-12);
}

TEST_CASE("reference problem contracts and matches the spectral solution") {
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, 0.5, 32);
  const auto h = sine(g, 0.5);
  const auto forcing = SpaceTimeField::constant_in_time(times, PeriodicField(g, 1));
  const McConfig mc{2000, 1, NoiseMode::independent, false};
  const auto r = picard_solve(h, forcing, 0.1, times, mc, {5e-3, 8, 8});
  CHECK(r.state.converged);
  CHECK(r.budget.gamma == doctest::Approx(0.25 * std::exp(0.5)).epsilon(1e-12));
  const auto& d = r.state.diff_history;
  REQUIRE(d.size() >= 3);
  for (std::size_t k = 2; k < d.size(); ++k) CHECK(d[k] / d[k - 1] <= 0.6);

  OracleConfig oc{g, 0.1, 0.5, 1e-3, true, 32};
  const auto oracle = solve_backward_burgers(h, SpaceTimeField::constant_in_time({0.0, 0.5}, PeriodicField(g, 1)), oc);
  const double rel = l2_distance(r.solution.slice(0), oracle.field.slice(0)) / l2_norm(oracle.field.slice(0));
  MESSAGE("relative L2 error at s = 0: " << rel);
  CHECK(rel < 0.05);
  // reported standard errors are of the size of the actual error
  CHECK(r.state.standard_error.slice(0).sup_abs() < 0.05);
  CHECK(r.state.standard_error.slice(0).sup_abs() > 1e-4);
}

TEST_CASE("gamma map is a pure function of its inputs") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 8);
  const auto drift = SpaceTimeField::constant_in_time(times, sine(g, 0.4));
  const auto forcing = SpaceTimeField::constant_in_time(times, sine(g, 0.1));
  const McConfig mc{101, 9, NoiseMode::independent, false};
  set_execution_threads(1);
  const auto a = gamma_map(drift, sine(g, 0.5), forcing, mc, 0.1, 2);
  set_execution_threads(4);
  const auto b = gamma_map(drift, sine(g, 0.5), forcing, mc, 0.1, 2);
  const auto c = gamma_map(drift, sine(g, 0.5), forcing, {101, 10, NoiseMode::independent, false}, 0.1, 2);
  set_execution_threads(1);
  CHECK(a.value == b.value);
  CHECK(a.standard_error == b.standard_error);
  CHECK(!(a.value == c.value));
  CHECK(a.value.slice(8) == sine(g, 0.5));
  CHECK_THROWS_AS(gamma_map(drift, sine(g, 0.5), forcing, {0, 1, NoiseMode::independent, false}, 0.1), InvalidInput);
  CHECK_THROWS_AS(gamma_map(drift, sine(g, 0.5), forcing, {3, 1, NoiseMode::independent, true}, 0.1), InvalidInput);
}

TEST_CASE("restart stride and full restarts agree statistically") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 16);
  const auto drift = SpaceTimeField::constant_in_time(times, sine(g, 0.4));
  const auto forcing = SpaceTimeField::constant_in_time(times, PeriodicField(g, 1));
  const McConfig mc{4000, 2, NoiseMode::independent, false};
  const auto full = gamma_map(drift, sine(g, 0.5), forcing, mc, 0.1, 1);
  const auto fill = gamma_map(drift, sine(g, 0.5), forcing, mc, 0.1, 16);
  double worst = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double se = std::hypot(full.standard_error.slice(5).at(0, i), fill.standard_error.slice(5).at(0, i));
    worst = std::max(worst, std::abs(full.value.slice(5).at(0, i) - fill.value.slice(5).at(0, i)) / se);
  }
  CHECK(worst < 5.0);
}

TEST_CASE("martingale integrand") {
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, 0.5, 4);
  const auto y = SpaceTimeField::constant_in_time(times, sine(g, 0.5));
  const MartingaleIntegrandField x(y);
  double out;
  x.evaluate(2, std::vector<double>{1.0}, std::span<double>(&out, 1));
  // spline derivative at N = 32
  CHECK(std::abs(out - 0.5 * std::cos(1.0)) < 1e-5);
  const auto c = SpaceTimeField::constant_in_time(times, constant(g, 0.3));
  CHECK(MartingaleIntegrandField(c).gradient().sup_abs() == 0.0);
}
