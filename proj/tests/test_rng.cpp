#include <doctest.h>

#include <cmath>
#include <vector>

#include "burgers/brownian.hpp"
#include "burgers/parallel.hpp"
#include "burgers/rng.hpp"

using namespace burgers;

// Known-answer vectors distributed with the Random123 library.
TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal stream moments") {
  NormalStream z(42, 7);
  const int n = 1 << 20;
  double m1 = 0, m2 = 0, m4 = 0;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    const double x = z(i);
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
    if (std::abs(x) > 3.0) ++tail;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
  // P(|Z| > 3) = 0.0026998
  const double p = 0.0026998;
  CHECK(std::abs(tail / double(n) - p) < 5.0 * std::sqrt(p / n));
}

TEST_CASE("normal stream is addressable") {
  NormalStream a(1, 3), b(1, 3), c(1, 4), d(2, 3);
  std::vector<double> fwd;
  for (int i = 0; i < 64; ++i) fwd.push_back(a(i));
  for (int i = 63; i >= 0; --i) CHECK(b(i) == fwd[i]);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 64; ++i) {
    same_c += c(i) == fwd[i];
    same_d += d(i) == fwd[i];
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
  NormalStream far(1, 3);
  const std::uint64_t big = (std::uint64_t{1} << 49) + 5;
  const double x = far(big);
  NormalStream again(1, 3);
  CHECK(again(big) == x);
}

TEST_CASE("brownian ensembles") {
  const std::vector<double> times{0.0, 0.1, 0.25, 0.5};
  SUBCASE("independent of thread count and batching") {
    set_execution_threads(1);
    const auto one = sample_brownian(times, 37, 2, NoiseMode::independent, 9, {5, false, 0});
    set_execution_threads(4);
    const auto four = sample_brownian(times, 37, 2, NoiseMode::independent, 9, {5, false, 0});
    set_execution_threads(1);
    CHECK(one == four);
    const auto tail = sample_brownian(times, 17, 2, NoiseMode::independent, 9, {5, false, 20});
    for (std::size_t p = 0; p < 17; ++p)
      for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t j = 0; j < 3; ++j) {
          const auto x = one.increment(p + 20, s, j);
          const auto y = tail.increment(p, s, j);
          CHECK(x[0] == y[0]);
          CHECK(x[1] == y[1]);
        }
  }
  SUBCASE("common mode shares noise across starts") {
    const auto w = sample_brownian(times, 4, 1, NoiseMode::common, 3, {6, false, 0});
    CHECK(w.increment(2, 0, 1)[0] == w.increment(2, 5, 1)[0]);
  }
  SUBCASE("antithetic pairs") {
    const auto w = sample_brownian(times, 6, 1, NoiseMode::common, 3, {1, true, 0});
    for (std::size_t j = 0; j < 3; ++j) CHECK(w.increment(3, 0, j)[0] == -w.increment(2, 0, j)[0]);
    CHECK(antithetic_sign(3, true) == -1.0);
    CHECK(antithetic_sign(3, false) == 1.0);
  }
  SUBCASE("increment variance matches the step") {
    const std::vector<double> t2{0.0, 0.04};
    const auto w = sample_brownian(t2, 200000, 1, NoiseMode::common, 5);
    double s2 = 0;
    for (std::size_t p = 0; p < w.paths(); ++p) s2 += std::pow(w.increment(p, 0, 0)[0], 2);
    s2 /= w.paths();
    CHECK(std::abs(s2 / 0.04 - 1.0) < 5.0 * std::sqrt(2.0 / 200000));
  }
  SUBCASE("truncation zeroes the tail") {
    const auto w = sample_brownian(times, 3, 1, NoiseMode::common, 3).truncated(1);
    CHECK(w.increment(1, 0, 0)[0] != 0.0);
    CHECK(w.increment(1, 0, 1)[0] == 0.0);
    CHECK(w.increment(1, 0, 2)[0] == 0.0);
  }
}
