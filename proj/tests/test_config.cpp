#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "burgers/config.hpp"
#include "burgers/error.hpp"
#include "burgers/field_io.hpp"

using namespace burgers;
using nlohmann::json;

namespace {

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  const auto c = parse_config(json::object());
  CHECK(c == ExperimentConfig{});
  CHECK(c.problem.terminal.preset == "zero");
}

TEST_CASE("round trip") {
  const auto j = json::parse(R"({
    "problem": {"dim": 2, "nu": 0.05, "T": 0.3,
                "h": {"preset": "sine_sum", "terms": [{"amplitude": 0.1, "wavenumber": 2, "axis": 1, "component": 0}]},
                "F": {"preset": "constant", "values": [0.1, 0.2]}},
    "grid": {"points_per_axis": 16, "time_steps": 20},
    "mc": {"paths": 64, "seed": 18446744073709551615, "mode": "common", "antithetic": true},
    "picard": {"tol": 1e-3, "max_iter": 4, "restart_stride": 5},
    "oracle": {"dt": 0.0001, "dealias": false},
    "diagnostics": {"enabled": true, "checks": ["bsde_residual"], "probes": [0.1, 0.2]},
    "sweep": {"parameter": "M", "values": [10, 20, 40]},
    "outputs": {"directory": "x", "formats": ["binary"]}
  })");
  const auto c = parse_config(j);
  CHECK(c.mc.seed == 18446744073709551615ull);
  CHECK(c.problem.forcing.values == std::vector<double>{0.1, 0.2});
  const auto again = parse_config(to_json(c));
  CHECK(again == c);
  CHECK(to_json(again).dump() == to_json(c).dump());
  // awkward doubles survive text serialization
  auto k = j;
  k["problem"]["nu"] = 0.1 + 0.2;
  CHECK(parse_config(json::parse(to_json(parse_config(k)).dump())).problem.nu == 0.1 + 0.2);
}

TEST_CASE("strict parsing names the offending key") {
  CHECK(error_path(json::parse(R"({"problem": {"h": {"preset": "sine", "amplitud": 1}}})")) == "problem.h.amplitud");
  CHECK(error_path(json::parse(R"({"grid": {"N": 16}})")) == "grid.N");
  CHECK(error_path(json::parse(R"({"extra": 1})")) == "extra");
  CHECK(error_path(json::parse(R"({"problem": {"nu": "0.1"}})")) == "problem.nu");
  CHECK(error_path(json::parse(R"({"problem": {"nu": -1}})")) == "problem.nu");
  CHECK(error_path(json::parse(R"({"mc": {"mode": "shared"}})")) == "mc.mode");
  CHECK(error_path(json::parse(R"({"mc": {"paths": 3, "antithetic": true}})")) == "mc.paths");
  CHECK(error_path(json::parse(R"({"grid": {"points_per_axis": 15}})")) == "grid.points_per_axis");
  CHECK(error_path(json::parse(R"({"problem": {"F": {"preset": "cubic"}}})")) == "problem.F.preset");
  CHECK(error_path(json::parse(R"({"sweep": {"parameter": "nu"}})")) == "sweep.parameter");
  CHECK(error_path(json::parse(R"({"diagnostics": {"checks": ["pde", "x"]}})")) == "diagnostics.checks[0]");
  CHECK(error_path(json::parse(R"({"problem": {"h": {"preset": "sine", "amplitude": 1, "axis": 1}}})")) == "problem.h");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("presets") {
  const GridSpec g(1, 16);
  FunctionSpec s{"sine", {}, {{0.5, 2, 0, 0}}, ""};
  const auto f = realize(s, g);
  for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(f.at(0, i) == 0.5 * std::sin(2 * g.coordinate(int(i))));
  const auto c = realize({"constant", {0.3}, {}, ""}, GridSpec(2, 8));
  CHECK(c.components() == 2);
  for (double v : c.values()) CHECK(v == 0.3);
  CHECK(realize({}, g).sup_abs() == 0.0);
  const auto dir = std::filesystem::temp_directory_path() / "burgers_fbsde_config_test";
  std::filesystem::create_directories(dir);
  write_field_csv(dir / "h.csv", f);
  CHECK(realize({"tabulated", {}, {}, "h.csv"}, g, dir) == f);
  CHECK_THROWS_AS(realize({"tabulated", {}, {}, "h.csv"}, GridSpec(1, 32), dir), ConfigError);
}
