#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snnloop/env.hpp"
#include "snnloop/neuron.hpp"

namespace snnloop {

// One flat JSON document fully determines an experiment; CLI flags override
// individual keys. Unknown keys are rejected.
struct ExperimentConfig {
  std::string env = "double_integrator";

  std::string neuron = "if";  // if | snm | mt | dc
  int mt_n = 4;
  std::string dc_inner = "mt";  // if | mt
  bool snm_literal = false;

  int T = 8;
  double alpha = 0.0;
  std::vector<double> alpha_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                    0.6, 0.7, 0.8, 0.9, 1.0};
  bool crpi = true;  // false: plain per-step initialization everywhere
  bool crpi_symmetric_clip = false;

  int episodes = 20;
  int horizon = 200;
  std::uint64_t master_seed = 1;
  int calibration_size = 2000;
  int jobs = 1;
  int smooth_window = 1;

  // Behavior-cloning hyperparameters (train-expert).
  double bc_learning_rate = 1e-3;
  double bc_momentum = 0.9;
  int bc_batch_size = 256;
  int bc_epochs = 50;
  int bc_dataset_episodes = 150;
  double bc_noise = 0.05;  // exploration noise during dataset collection
  std::vector<int> hidden = {64, 64};

  std::string out_dir = "out";

  // Optional env overrides.
  std::optional<std::vector<double>> init_lo;
  std::optional<std::vector<double>> init_hi;

  void validate() const;
  NeuronKind neuron_kind() const;
  std::unique_ptr<Environment> build_env() const;

  // Canonical JSON with every key present, suitable for hashing and for
  // echoing into artifact headers.
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  bool operator==(const ExperimentConfig& other) const;
};

// FNV-1a hash of the canonical JSON, as fixed-width hex.
std::string config_hash(const ExperimentConfig& config);

}  // namespace snnloop
