#pragma once

#include "snnloop/bc.hpp"
#include "snnloop/config.hpp"
#include "snnloop/env.hpp"
#include "snnloop/spiking.hpp"

namespace snnloop {

// Expert demonstrations for behavior cloning. Rollouts execute the expert
// action plus a small exploration perturbation so the dataset covers a
// shell around the expert trajectory; labels are the unperturbed actions.
BcDataset collect_expert_dataset(const Environment& env,
                                 const ExperimentConfig& config);

// Trains the imitation policy with the configured architecture and
// hyperparameters.
BcResult train_expert_policy(const Environment& env,
                             const ExperimentConfig& config);

// Observations visited by the (closed-loop) policy itself; these are the
// calibration states for threshold fitting.
std::vector<Eigen::VectorXd> calibration_observations(
    const Environment& env, const MlpPolicy& policy,
    const ExperimentConfig& config);

// calibrate + convert in one step, using the config's neuron kind and T.
SpikingNetwork convert_policy(const Environment& env, const MlpPolicy& policy,
                              const ExperimentConfig& config);

}  // namespace snnloop
