#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "burgers/error.hpp"
#include "burgers/experiments.hpp"
#include "burgers/parallel.hpp"

namespace {

enum Exit { kOk = 0, kDiagnostics = 1, kConfig = 2, kSolver = 3 };

int thread_count(const std::optional<int>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BURGERS_FBSDE_THREADS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw burgers::ConfigError("BURGERS_FBSDE_THREADS", "not an integer");
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic (FBSDE) and spectral solvers for backward Burgers on the torus"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  for (const char* name : {"solve", "oracle", "compare", "converge", "diagnose", "budget"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "overrides mc.seed");
    sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
    sub->add_option("--out", out, "output directory (overrides outputs.directory)");
  }
  app.get_subcommand("solve")->description("Picard solve, field and solver report");
  app.get_subcommand("oracle")->description("pseudo-spectral reference solution");
  app.get_subcommand("compare")->description("Picard against the oracle");
  app.get_subcommand("converge")->description("error against M, dt or N with a fitted slope");
  app.get_subcommand("diagnose")->description("solve plus the diagnostics suite");
  app.get_subcommand("budget")->description("print K, gamma(T) and T0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    auto config = burgers::load_config(config_path);
    if (seed) config.mc.seed = *seed;
    const int n = thread_count(threads);
    if (n < 1) throw burgers::ConfigError("--threads", "must be >= 1");
    burgers::set_execution_threads(n);

    burgers::RunOptions opts;
    opts.out = out;
    opts.base = std::filesystem::path(config_path).parent_path();
    opts.log = &std::cout;

    if (cmd == "budget") {
      burgers::print_budget(std::cout, burgers::problem_budget(config, opts.base));
      return kOk;
    }
    if (cmd == "solve") {
      const auto r = burgers::run_solve(config, opts);
      return r.diagnostics_pass ? kOk : kDiagnostics;
    }
    if (cmd == "diagnose") {
      const auto r = burgers::run_diagnose(config, opts);
      return r.diagnostics_pass ? kOk : kDiagnostics;
    }
    if (cmd == "oracle") burgers::run_oracle(config, opts);
    if (cmd == "compare") burgers::run_compare(config, opts);
    if (cmd == "converge") burgers::run_convergence(config, opts);
    return kOk;
  } catch (const burgers::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const burgers::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  }
}
