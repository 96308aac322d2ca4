#include "burgers/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "burgers/error.hpp"
#include "burgers/field_io.hpp"

namespace burgers {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Walks one JSON object, remembering the key path for error messages.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!keys.contains(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string path(const char* key) const { return join(path_, key); }
  const json& raw(const char* key) const { return j_.at(key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key), "must be finite");
    return x;
  }
  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<long long>();
  }
  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(path(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const char* key, std::string fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  template <class T>
  std::vector<T> list(const char* key, std::vector<T> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& e = v[i];
      const std::string where = path(key) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string()) throw ConfigError(where, "expected a string");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!e.is_number()) throw ConfigError(where, "expected a number");
      } else {
        if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<long long>() >= 0)) {
          throw ConfigError(where, "expected a nonnegative integer");
        }
      }
      out.push_back(e.get<T>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

FunctionSpec parse_function(const json& j, const std::string& path) {
  const Section s(j, path, {"preset", "value", "values", "amplitude", "wavenumber", "axis", "component", "terms", "file"});
  FunctionSpec f;
  f.preset = s.string("preset", "zero");
  auto term_from = [&](const Section& t) {
    SineTerm term;
    term.amplitude = t.number("amplitude", 0.0);
    term.wavenumber = static_cast<int>(t.integer("wavenumber", 1));
    term.axis = static_cast<int>(t.integer("axis", 0));
    term.component = static_cast<int>(t.integer("component", 0));
    return term;
  };
  if (f.preset == "zero") {
    require(!s.has("value") && !s.has("values") && !s.has("terms") && !s.has("file") && !s.has("amplitude"),
            path, "the zero preset takes no parameters");
  } else if (f.preset == "constant") {
    require(s.has("value") != s.has("values"), path, "constant needs exactly one of value or values");
    f.values = s.has("value") ? std::vector<double>{s.number("value", 0.0)} : s.list<double>("values", {});
    require(!f.values.empty(), s.path("values"), "must not be empty");
  } else if (f.preset == "sine") {
    require(s.has("amplitude"), s.path("amplitude"), "required for the sine preset");
    f.terms.push_back(term_from(s));
  } else if (f.preset == "sine_sum") {
    require(s.has("terms") && s.raw("terms").is_array(), s.path("terms"), "expected a list of sine terms");
    const auto& terms = s.raw("terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const Section t(terms[i], s.path("terms") + "[" + std::to_string(i) + "]",
                      {"amplitude", "wavenumber", "axis", "component"});
      f.terms.push_back(term_from(t));
    }
  } else if (f.preset == "tabulated") {
    f.file = s.string("file", "");
    require(!f.file.empty(), s.path("file"), "required for the tabulated preset");
  } else {
    throw ConfigError(s.path("preset"), "unknown preset '" + f.preset + "'");
  }
  return f;
}

json function_json(const FunctionSpec& f) {
  json j{{"preset", f.preset}};
  if (f.preset == "constant") j["values"] = f.values;
  auto term_json = [](const SineTerm& t) {
    return json{{"amplitude", t.amplitude}, {"wavenumber", t.wavenumber}, {"axis", t.axis}, {"component", t.component}};
  };
  if (f.preset == "sine") j.update(term_json(f.terms.front()));
  if (f.preset == "sine_sum") {
    j["terms"] = json::array();
    for (const auto& t : f.terms) j["terms"].push_back(term_json(t));
  }
  if (f.preset == "tabulated") j["file"] = f.file;
  return j;
}

void check_terms(const FunctionSpec& f, int dim, const std::string& path) {
  for (const auto& t : f.terms) {
    require(t.axis >= 0 && t.axis < dim, path, "sine axis out of range");
    require(t.component >= 0 && t.component < dim, path, "sine component out of range");
  }
  if (f.preset == "constant") {
    require(f.values.size() == 1 || f.values.size() == static_cast<std::size_t>(dim), path,
            "constant needs 1 or dim values");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  const Section root(j, "", {"problem", "grid", "mc", "picard", "oracle", "diagnostics", "sweep", "outputs"});
  ExperimentConfig c;
  static const json empty = json::object();
  auto sub = [&](const char* key) -> const json& { return root.has(key) ? root.raw(key) : empty; };

  {
    const Section s(sub("problem"), "problem", {"dim", "nu", "T", "alpha", "h", "F"});
    c.problem.dim = static_cast<int>(s.integer("dim", 1));
    require(c.problem.dim >= 1 && c.problem.dim <= kMaxDim, s.path("dim"), "must be 1, 2 or 3");
    c.problem.nu = s.number("nu", 0.1);
    require(c.problem.nu > 0.0, s.path("nu"), "must be positive");
    c.problem.horizon = s.number("T", 0.5);
    require(c.problem.horizon > 0.0, s.path("T"), "must be positive");
    c.problem.alpha = s.number("alpha", 3.0);
    require(c.problem.alpha >= 0.0, s.path("alpha"), "must be nonnegative");
    if (s.has("h")) c.problem.terminal = parse_function(s.raw("h"), s.path("h"));
    if (s.has("F")) c.problem.forcing = parse_function(s.raw("F"), s.path("F"));
    check_terms(c.problem.terminal, c.problem.dim, s.path("h"));
    check_terms(c.problem.forcing, c.problem.dim, s.path("F"));
  }
  {
    const Section s(sub("grid"), "grid", {"points_per_axis", "time_steps"});
    c.grid.points_per_axis = static_cast<int>(s.integer("points_per_axis", 128));
    require(c.grid.points_per_axis >= 8 && c.grid.points_per_axis % 2 == 0, s.path("points_per_axis"),
            "must be even and >= 8");
    c.grid.time_steps = static_cast<int>(s.integer("time_steps", 128));
    require(c.grid.time_steps >= 1, s.path("time_steps"), "must be >= 1");
  }
  {
    const Section s(sub("mc"), "mc", {"paths", "seed", "mode", "antithetic"});
    c.mc.paths = s.unsigned_integer("paths", 1000);
    require(c.mc.paths >= 1, s.path("paths"), "must be >= 1");
    c.mc.seed = s.unsigned_integer("seed", 1);
    const auto mode = s.string("mode", "independent");
    try {
      c.mc.mode = noise_mode_from_string(mode);
    } catch (const InvalidInput&) {
      throw ConfigError(s.path("mode"), "expected 'common' or 'independent'");
    }
    c.mc.antithetic = s.boolean("antithetic", false);
    require(!c.mc.antithetic || c.mc.paths % 2 == 0, s.path("paths"), "antithetic sampling needs an even count");
  }
  {
    const Section s(sub("picard"), "picard", {"tol", "max_iter", "restart_stride"});
    c.picard.tol = s.number("tol", 5e-3);
    require(c.picard.tol > 0.0, s.path("tol"), "must be positive");
    c.picard.max_iter = static_cast<int>(s.integer("max_iter", 8));
    require(c.picard.max_iter >= 1, s.path("max_iter"), "must be >= 1");
    c.picard.restart_stride = static_cast<int>(s.integer("restart_stride", 1));
    require(c.picard.restart_stride >= 1, s.path("restart_stride"), "must be >= 1");
  }
  {
    const Section s(sub("oracle"), "oracle", {"dt", "dealias"});
    c.oracle.dt = s.number("dt", 1e-3);
    require(c.oracle.dt > 0.0, s.path("dt"), "must be positive");
    c.oracle.dealias = s.boolean("dealias", true);
  }
  {
    const Section s(sub("diagnostics"), "diagnostics",
                    {"enabled", "checks", "probes", "probe_step", "restart_paths", "outer_paths", "bsde_paths",
                     "flow_paths", "determinism_paths", "determinism_seeds", "moment_orders", "pde_threshold",
                     "bsde_threshold", "composition_threshold"});
    auto& d = c.diagnostics;
    const DiagnosticsSection defaults;
    d.enabled = s.boolean("enabled", false);
    d.checks = s.list<std::string>("checks", {});
    static const std::set<std::string> known{"pde_residual", "flow_consistency", "composition_law", "bsde_residual",
                                             "determinism", "flow_regularity", "tangent_flow"};
    for (std::size_t i = 0; i < d.checks.size(); ++i) {
      require(known.contains(d.checks[i]), s.path("checks") + "[" + std::to_string(i) + "]",
              "unknown check '" + d.checks[i] + "'");
    }
    d.probes = s.list<double>("probes", {});
    require(d.probes.size() % c.problem.dim == 0, s.path("probes"), "length must be a multiple of dim");
    d.probe_step = static_cast<int>(s.integer("probe_step", 0));
    require(d.probe_step >= 0 && d.probe_step <= c.grid.time_steps, s.path("probe_step"), "outside the time grid");
    d.restart_paths = s.unsigned_integer("restart_paths", defaults.restart_paths);
    d.outer_paths = s.unsigned_integer("outer_paths", defaults.outer_paths);
    d.bsde_paths = s.unsigned_integer("bsde_paths", defaults.bsde_paths);
    d.flow_paths = s.unsigned_integer("flow_paths", defaults.flow_paths);
    d.determinism_paths = s.list<std::size_t>("determinism_paths", defaults.determinism_paths);
    d.determinism_seeds = s.unsigned_integer("determinism_seeds", defaults.determinism_seeds);
    d.moment_orders = s.list<double>("moment_orders", defaults.moment_orders);
    d.pde_threshold = s.number("pde_threshold", defaults.pde_threshold);
    d.bsde_threshold = s.number("bsde_threshold", defaults.bsde_threshold);
    d.composition_threshold = s.number("composition_threshold", defaults.composition_threshold);
    require(d.restart_paths >= 2 && d.outer_paths >= 1 && d.bsde_paths >= 1 && d.flow_paths >= 1,
            "diagnostics", "path counts must be positive (restart_paths >= 2)");
  }
  {
    const Section s(sub("sweep"), "sweep", {"parameter", "values"});
    c.sweep.parameter = s.string("parameter", "");
    c.sweep.values = s.list<double>("values", {});
    require(c.sweep.parameter.empty() || c.sweep.parameter == "M" || c.sweep.parameter == "dt" ||
                c.sweep.parameter == "N",
            s.path("parameter"), "expected 'M', 'dt' or 'N'");
    for (double v : c.sweep.values) require(v > 0.0, s.path("values"), "entries must be positive");
  }
  {
    const Section s(sub("outputs"), "outputs", {"directory", "formats"});
    c.outputs.directory = s.string("directory", "runs/default");
    c.outputs.formats = s.list<std::string>("formats", {"json", "csv"});
    for (std::size_t i = 0; i < c.outputs.formats.size(); ++i) {
      const auto& f = c.outputs.formats[i];
      require(f == "json" || f == "csv" || f == "binary", s.path("formats") + "[" + std::to_string(i) + "]",
              "expected json, csv or binary");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  const auto& d = c.diagnostics;
  return json{
      {"problem",
       {{"dim", c.problem.dim},
        {"nu", c.problem.nu},
        {"T", c.problem.horizon},
        {"alpha", c.problem.alpha},
        {"h", function_json(c.problem.terminal)},
        {"F", function_json(c.problem.forcing)}}},
      {"grid", {{"points_per_axis", c.grid.points_per_axis}, {"time_steps", c.grid.time_steps}}},
      {"mc",
       {{"paths", c.mc.paths},
        {"seed", c.mc.seed},
        {"mode", std::string(to_string(c.mc.mode))},
        {"antithetic", c.mc.antithetic}}},
      {"picard", {{"tol", c.picard.tol}, {"max_iter", c.picard.max_iter}, {"restart_stride", c.picard.restart_stride}}},
      {"oracle", {{"dt", c.oracle.dt}, {"dealias", c.oracle.dealias}}},
      {"diagnostics",
       {{"enabled", d.enabled},
        {"checks", d.checks},
        {"probes", d.probes},
        {"probe_step", d.probe_step},
        {"restart_paths", d.restart_paths},
        {"outer_paths", d.outer_paths},
        {"bsde_paths", d.bsde_paths},
        {"flow_paths", d.flow_paths},
        {"determinism_paths", d.determinism_paths},
        {"determinism_seeds", d.determinism_seeds},
        {"moment_orders", d.moment_orders},
        {"pde_threshold", d.pde_threshold},
        {"bsde_threshold", d.bsde_threshold},
        {"composition_threshold", d.composition_threshold}}},
      {"sweep", {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}}},
      {"outputs", {{"directory", c.outputs.directory}, {"formats", c.outputs.formats}}},
  };
}

PeriodicField realize(const FunctionSpec& spec, const GridSpec& grid, const std::filesystem::path& base) {
  const int dim = grid.dim();
  if (spec.preset == "zero") return PeriodicField(grid, dim);
  if (spec.preset == "constant") {
    std::vector<double> v(dim, spec.values.front());
    if (spec.values.size() == static_cast<std::size_t>(dim)) v = spec.values;
    return PeriodicField::constant(grid, v);
  }
  if (spec.preset == "sine" || spec.preset == "sine_sum") {
    return PeriodicField::from_function(grid, dim, [&](std::span<const double> th, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      for (const auto& t : spec.terms) out[t.component] += t.amplitude * std::sin(t.wavenumber * th[t.axis]);
    });
  }
  if (spec.preset == "tabulated") {
    std::filesystem::path file(spec.file);
    if (file.is_relative() && !base.empty()) file = base / file;
    PeriodicField f = read_field_csv(file);
    if (f.grid() != grid || f.components() != dim) {
      throw ConfigError(spec.file, "tabulated field does not match the configured grid");
    }
    return f;
  }
  throw ConfigError(spec.preset, "unknown preset");
}

}  // namespace burgers
