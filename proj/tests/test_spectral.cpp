#include <doctest.h>

#include <cmath>

#include "burgers/spectral.hpp"

using namespace burgers;

TEST_CASE("transform round trip and coefficients") {
  const GridSpec g(2, 16);
  const auto f = PeriodicField::from_function(g, 2, [](auto th, auto out) {
    out[0] = 0.7 + std::sin(th[0]) * std::cos(2 * th[1]);
    out[1] = std::cos(3 * th[0] + th[1]);
  });
  const auto c = forward_transform(f);
  const auto back = inverse_transform(c);
  CHECK(sup_distance(back, f) < 1e-14);
  const int zero[] = {0, 0};
  CHECK(std::abs(c.coefficient(0, zero) - 0.7) < 1e-14);
  // cos(3a + b) = (e^{i(3a+b)} + e^{-i(3a+b)}) / 2
  const int k[] = {3, 1};
  CHECK(std::abs(c.coefficient(1, k) - 0.5) < 1e-14);
}

TEST_CASE("derivatives of band-limited fields") {
  const GridSpec g(2, 32);
  const auto f = PeriodicField::from_function(g, 1, [](auto th, auto out) {
    out[0] = std::sin(2 * th[0]) * std::cos(th[1]);
  });
  const auto grad = spectral_gradient(f);
  const auto lap = spectral_laplacian(f);
  double err = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double p[2];
    g.node_point(i, p);
    err = std::max(err, std::abs(grad.at(0, i) - 2 * std::cos(2 * p[0]) * std::cos(p[1])));
    err = std::max(err, std::abs(grad.at(1, i) + std::sin(2 * p[0]) * std::sin(p[1])));
    err = std::max(err, std::abs(lap.at(0, i) + 5 * std::sin(2 * p[0]) * std::cos(p[1])));
  }
  CHECK(err < 1e-12);
  const double c[] = {1.5};
  CHECK(spectral_gradient(PeriodicField::constant(g, c)).sup_abs() == 0.0);
  CHECK(spectral_laplacian(PeriodicField::constant(g, c)).sup_abs() == 0.0);
}

TEST_CASE("sobolev norm") {
  const GridSpec g(1, 32);
  const double a = 0.5;
  const int k = 3;
  const auto f = PeriodicField::from_function(g, 1, [&](auto th, auto out) { out[0] = a * std::sin(k * th[0]); });
  // two modes of modulus a/2 with weight (1 + k^2)^alpha
  for (double alpha : {0.0, 1.0, 2.5}) {
    const double expect = a * std::sqrt(std::pow(1.0 + k * k, alpha) / 2.0);
    CHECK(sobolev_norm(f, alpha) == doctest::Approx(expect).epsilon(1e-13));
  }
  CHECK(sobolev_norm(f, 0.0) == doctest::Approx(l2_norm(f)).epsilon(1e-13));
}

TEST_CASE("advection") {
  const GridSpec g(1, 32);
  const auto u = PeriodicField::from_function(g, 1, [](auto th, auto out) { out[0] = std::sin(th[0]); });
  for (bool dealias : {false, true}) {
    const auto a = advection(u, dealias);
    double err = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      err = std::max(err, std::abs(a.at(0, i) - 0.5 * std::sin(2 * g.coordinate(int(i)))));
    }
    CHECK(err < 1e-13);
  }
  // the 2/3 rule drops the k = 12 product mode on N = 16
  const GridSpec h(1, 16);
  const auto v = PeriodicField::from_function(h, 1, [](auto th, auto out) { out[0] = std::sin(6 * th[0]); });
  CHECK(advection(v, true).sup_abs() < 1e-14);
  CHECK(advection(v, false).sup_abs() > 1.0);
}
