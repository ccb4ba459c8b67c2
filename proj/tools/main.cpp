// modcomb command-line front end: run experiments from JSON configs,
// list the available experiment ids, or validate a config without running.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "modcomb/experiments.hpp"

namespace exps = modcomb::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Iterative model combination experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "Output directory override");
  run->add_option("--seed", seed, "RNG seed override")
      ->each([&seed_given](const std::string&) { seed_given = true; });

  auto* list =
      app.add_subcommand("list-experiments", "List available experiment ids");

  auto* validate =
      app.add_subcommand("validate", "Check a config file without running");
  validate->add_option("config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    for (const auto& id : exps::experiment_ids()) std::cout << id << "\n";
    return 0;
  }

  exps::ExperimentConfig config;
  try {
    config = exps::load_config(config_path);
    exps::apply_env_overrides(config);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed_given) config.seed = seed;
    exps::validate_config(config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  if (validate->parsed()) {
    std::cout << "ok: " << config.experiment << "\n";
    return 0;
  }

  try {
    exps::run_experiment(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote " << config.output_dir << "\n";
  return 0;
}
