#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "burgers/error.hpp"
#include "burgers/field_io.hpp"

using namespace burgers;

namespace {

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "burgers_fbsde_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

PeriodicField awkward(const GridSpec& g) {
  return PeriodicField::from_function(g, g.dim(), [](auto th, auto out) {
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::exp(std::sin(th[0] + c)) / 3.0 - 1e-300;
  });
}

}  // namespace

TEST_CASE("csv snapshot round trip is exact") {
  const GridSpec g(2, 8);
  const auto f = awkward(g);
  const auto path = scratch("snap.csv");
  write_field_csv(path, f);
  CHECK(read_field_csv(path) == f);
}

TEST_CASE("binary round trips are exact") {
  const GridSpec g(3, 8);
  const auto f = awkward(g);
  write_field_binary(scratch("snap"), f);
  CHECK(read_field_binary(scratch("snap")) == f);
  const SpaceTimeField st({0.0, 0.1, 0.3}, {f, f, awkward(g)});
  write_spacetime_binary(scratch("st"), st);
  CHECK(read_spacetime_binary(scratch("st")) == st);
}

TEST_CASE("malformed files are rejected") {
  const auto path = scratch("bad.csv");
  {
    std::ofstream out(path);
    out << "i0,theta0,c0\n0,0,1\n1,3.14,zz\n";
  }
  CHECK_THROWS_AS(read_field_csv(path), Error);
  CHECK_THROWS_AS(read_field_csv(scratch("missing.csv")), Error);
}
