#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modcomb/common.hpp"

namespace modcomb::experiments {

/// One flat parameter block for all experiments; per-experiment fields are
/// prefixed.  Defaults follow the reference setups.
struct ExperimentConfig {
  std::string experiment = "toy_suboptimality";
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // nu_rate: 2D diffusion rate study
  std::vector<double> nu_values{0.0, 0.5, 1.0, 2.0};
  std::vector<double> nu_extra_values{-2.0 / 3.0, -0.6455};
  double nu_mu1 = 1.0;
  // Anisotropic second coefficient keeps the target outside both individual
  // spaces for every tested coupling value, so the rate stays observable.
  double nu_mu2 = 0.7;
  int nu_grid_cells = 10;
  double nu_dt = 1e-3;
  int nu_max_iterations = 400;

  // reaction_diffusion: 1D benchmark with the four-method error table
  double rd_mu = 1.0;
  double rd_eta = 0.25;
  int rd_grid_cells = 20;
  double rd_dt = 1e-3;
  int rd_trajectories = 500;
  int rd_steps = 10;
  std::string rd_initial_law = "normal";
  int rd_dictionary_degree = 10;
  int rd_test_trajectories = 50;
  int rd_test_steps = 50;
  int rd_max_iterations = 200;

  // toy_suboptimality: the two-dimensional Hilbert toy
  int toy_max_iterations = 40;

  // mpc_compare: predictor-structure comparison on the controlled oscillator
  int mpc_seeds = 20;
  int mpc_steps = 60;
  int mpc_horizon = 5;
  int mpc_training_samples = 400;
  double mpc_control_bound = 2.0;
  int mpc_dictionary_degree = 12;
};

const std::vector<std::string>& experiment_ids();

/// JSON file IO.  Unknown keys are rejected; save/load round-trips.
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

void validate_config(const ExperimentConfig& config);

/// MODCOMB_OUT and MODCOMB_SEED override output_dir and seed; nothing else
/// is overridable from the environment.
void apply_env_overrides(ExperimentConfig& config);

/// Runs the configured experiment, writing all artifacts (iteration
/// histories, error tables, angle reports, summary.json) under
/// config.output_dir.  Deterministic given config + seed.  Throws
/// modcomb::Error on failure.
void run_experiment(const ExperimentConfig& config);

/// Rounds to 12 significant digits (the precision used in emitted
/// summaries).
double round_sig12(double v);

}  // namespace modcomb::experiments
