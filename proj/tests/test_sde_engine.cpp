#include <doctest.h>

#include <cmath>

#include "burgers/error.hpp"
#include "burgers/parallel.hpp"
#include "burgers/sde_engine.hpp"

using namespace burgers;

namespace {

SpaceTimeField constant_drift(const GridSpec& g, const std::vector<double>& times, double c) {
  std::vector<double> v(g.dim(), c);
  return SpaceTimeField::constant_in_time(times, PeriodicField::constant(g, v));
}

}  // namespace

TEST_CASE("zero drift gives scaled Brownian motion") {
  const GridSpec g(1, 16);
  const auto times = uniform_times(0.0, 0.5, 10);
  const auto drift = constant_drift(g, times, 0.0);
  const auto noise = sample_brownian(times, 8, 1, NoiseMode::common, 11);
  const double nu = 0.1;
  const auto chars = integrate_forward(drift, 0.0, g.identity_points(), noise, nu);
  const double sigma = std::sqrt(2 * nu);
  for (std::size_t p = 0; p < 8; ++p) {
    double w = 0;
    for (std::size_t j = 0; j < 10; ++j) {
      w += sigma * noise.increment(p, 0, j)[0];
      // every start shares the displacement bitwise
      CHECK(chars.displacement(p, 0, j + 1)[0] == chars.displacement(p, 9, j + 1)[0]);
      CHECK(chars.displacement(p, 3, j + 1)[0] == doctest::Approx(w).epsilon(1e-14));
    }
    CHECK(chars.position(p, 4, 10, 0) == g.coordinate(4) + chars.displacement(p, 4, 10)[0]);
  }
  const auto tangent = integrate_tangent(drift, chars);
  for (std::size_t j = 0; j <= 10; ++j) CHECK(tangent.matrix(5, 2, j)[0] == 1.0);
}

TEST_CASE("constant drift translates") {
  const GridSpec g(2, 8);
  const auto times = uniform_times(0.25, 0.75, 5);
  const auto drift = constant_drift(g, times, 0.4);
  const auto noise = sample_brownian(times, 3, 2, NoiseMode::common, 2).truncated(0);
  const std::vector<double> start{1.0, 2.0};
  const auto chars = integrate_forward(drift, 0.25, start, noise, 0.1);
  CHECK(chars.position(1, 0, 5, 0) == doctest::Approx(1.0 + 0.4 * 0.5).epsilon(1e-14));
  CHECK(chars.position(1, 0, 5, 1) == doctest::Approx(2.0 + 0.4 * 0.5).epsilon(1e-14));
}

TEST_CASE("euler step against a hand computation") {
  const GridSpec g(1, 64);
  const auto times = uniform_times(0.0, 0.2, 2);
  const auto slice = PeriodicField::from_function(g, 1, [](auto th, auto out) { out[0] = std::sin(th[0]); });
  const auto drift = SpaceTimeField::constant_in_time(times, slice);
  const auto noise = sample_brownian(times, 1, 1, NoiseMode::common, 4);
  const double z0 = g.coordinate(8);
  const auto chars = integrate_forward(drift, 0.0, std::vector<double>{z0}, noise, 0.05);
  const double s = std::sqrt(0.1);
  const double z1 = z0 + std::sin(z0) * 0.1 + s * noise.increment(0, 0, 0)[0];
  CHECK(chars.position(0, 0, 1, 0) == doctest::Approx(z1).epsilon(1e-14));
  // z1 is off-grid; the spline is accurate to ~1e-8 at N = 64
  const double z2 = z1 + std::sin(z1) * 0.1 + s * noise.increment(0, 0, 1)[0];
  CHECK(std::abs(chars.position(0, 0, 2, 0) - z2) < 1e-7);
  // tangent: (1 + cos z0 dt)(1 + cos z1 dt)
  const auto tan = integrate_tangent(drift, chars);
  CHECK(std::abs(tan.matrix(0, 0, 2)[0] - (1 + 0.1 * std::cos(z0)) * (1 + 0.1 * std::cos(z1))) < 1e-6);
}

TEST_CASE("results do not depend on the thread count") {
  const GridSpec g(1, 32);
  const auto times = uniform_times(0.0, 0.5, 16);
  const auto slice = PeriodicField::from_function(g, 1, [](auto th, auto out) { out[0] = 0.5 * std::sin(th[0]); });
  const auto drift = SpaceTimeField::constant_in_time(times, slice);
  const auto noise = sample_brownian(times, 20, 1, NoiseMode::independent, 4, {32, false, 0});
  set_execution_threads(1);
  const auto a = integrate_forward(drift, 0.0, g.identity_points(), noise, 0.1);
  const auto ta = integrate_tangent(drift, a);
  set_execution_threads(4);
  const auto b = integrate_forward(drift, 0.0, g.identity_points(), noise, 0.1);
  const auto tb = integrate_tangent(drift, b);
  set_execution_threads(1);
  for (std::size_t p = 0; p < 20; ++p)
    for (std::size_t s = 0; s < 32; ++s)
      for (std::size_t j = 0; j <= 16; ++j) {
        CHECK(a.displacement(p, s, j)[0] == b.displacement(p, s, j)[0]);
        CHECK(ta.matrix(p, s, j)[0] == tb.matrix(p, s, j)[0]);
      }
}

TEST_CASE("mismatched noise is rejected") {
  const GridSpec g(1, 8);
  const auto times = uniform_times(0.0, 0.5, 4);
  const auto drift = constant_drift(g, times, 0.0);
  const auto noise = sample_brownian(uniform_times(0.0, 0.5, 5), 2, 1, NoiseMode::common, 1);
  CHECK_THROWS_AS(integrate_forward(drift, 0.0, g.identity_points(), noise, 0.1), InvalidInput);
  const auto ok = sample_brownian(times, 2, 1, NoiseMode::common, 1);
  CHECK_THROWS_AS(integrate_forward(drift, 0.0, g.identity_points(), ok, -1.0), InvalidInput);
}
