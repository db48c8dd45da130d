// membrane: solve, diagnose and sweep experiments described by a config file.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "membrane/experiment.hpp"
#include "membrane/selftest.hpp"

namespace {

using membrane::ExitStatus;

int run_with_config(const std::string& path, ExitStatus (*verb)(const membrane::ExperimentConfig&, std::ostream&)) {
  membrane::ExperimentConfig config;
  try {
    config = membrane::load_experiment(path);
  } catch (const membrane::ConfigError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return static_cast<int>(ExitStatus::config_error);
  } catch (const std::invalid_argument& e) {
    std::cerr << path << ": config error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::config_error);
  }
  try {
    return static_cast<int>(verb(config, std::cout));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::diagnostic_error);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase membrane solver and free-boundary diagnostics"};
  app.require_subcommand(1);

  std::string config;
  auto* solve = app.add_subcommand("solve", "Solve and write field.csv and solve_report.json");
  solve->add_option("config", config, "Experiment config file")->required();
  auto* diagnose = app.add_subcommand("diagnose", "Solve, then run the requested diagnostics");
  diagnose->add_option("config", config, "Experiment config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Boundary-perturbation stability sweep");
  sweep->add_option("config", config, "Experiment config file")->required();
  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitStatus::usage);
  }

  if (*solve) return run_with_config(config, membrane::run_solve);
  if (*diagnose) return run_with_config(config, membrane::run_diagnose);
  if (*sweep) return run_with_config(config, membrane::run_sweep);
  if (*selftest) {
    const bool ok = membrane::print_selftest(membrane::run_selftest(), std::cout);
    return ok ? 0 : static_cast<int>(ExitStatus::fatal_violation);
  }
  return static_cast<int>(ExitStatus::usage);
}
