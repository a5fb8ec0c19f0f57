#include "snnloop/pipeline.hpp"

#include <algorithm>
#include <random>

#include "snnloop/policy.hpp"
#include "snnloop/rng.hpp"
#include "snnloop/rollout.hpp"

namespace snnloop {

BcDataset collect_expert_dataset(const Environment& env,
                                 const ExperimentConfig& config) {
  const int per_episode = env.spec().horizon;
  const std::int64_t total =
      static_cast<std::int64_t>(config.bc_dataset_episodes) * per_episode;
  BcDataset data;
  data.obs.resize(env.spec().obs_dim, total);
  data.actions.resize(env.spec().act_dim, total);

  std::int64_t col = 0;
  for (int ep = 0; ep < config.bc_dataset_episodes; ++ep) {
    const std::uint64_t seed =
        derive_seed(config.master_seed, seed_stream::kDataset,
                    static_cast<std::uint64_t>(ep));
    std::mt19937_64 noise_rng = make_rng(mix_seed(seed) ^ 0x5e5eull);
    std::normal_distribution<double> noise(
        0.0, config.bc_noise * env.spec().action_scale);
    EnvState s = env.reset(seed);
    for (int k = 0; k < per_episode; ++k, ++col) {
      const Eigen::VectorXd label = env.expert_action(s);
      data.obs.col(col) = env.observe(s);
      data.actions.col(col) = label;
      Eigen::VectorXd executed = label;
      if (config.bc_noise > 0.0) {
        for (Eigen::Index i = 0; i < executed.size(); ++i) {
          executed[i] = std::clamp(executed[i] + noise(noise_rng),
                                   -env.spec().action_scale,
                                   env.spec().action_scale);
        }
      }
      s = env.step(s, executed).first;
    }
  }
  return data;
}

BcResult train_expert_policy(const Environment& env,
                             const ExperimentConfig& config) {
  BcDataset data = collect_expert_dataset(env, config);
  std::vector<int> arch;
  arch.push_back(env.spec().obs_dim);
  for (int h : config.hidden) arch.push_back(h);
  arch.push_back(env.spec().act_dim);

  BcConfig bc;
  bc.learning_rate = config.bc_learning_rate;
  bc.momentum = config.bc_momentum;
  bc.batch_size = config.bc_batch_size;
  bc.epochs = config.bc_epochs;
  bc.seed = derive_seed(config.master_seed, seed_stream::kTrainer);
  return bc_train(data, arch, env.spec().action_scale, bc);
}

std::vector<Eigen::VectorXd> calibration_observations(
    const Environment& env, const MlpPolicy& policy,
    const ExperimentConfig& config) {
  std::vector<Eigen::VectorXd> states;
  states.reserve(static_cast<std::size_t>(config.calibration_size));
  AnnPolicy ann(policy);
  int episode = 0;
  while (static_cast<int>(states.size()) < config.calibration_size) {
    const std::uint64_t seed =
        derive_seed(config.master_seed, seed_stream::kCalibration,
                    static_cast<std::uint64_t>(episode++));
    Trajectory traj = rollout(env, ann, env.spec().horizon, seed);
    for (Eigen::VectorXd& obs : traj.observations) {
      states.push_back(std::move(obs));
      if (static_cast<int>(states.size()) >= config.calibration_size) break;
    }
  }
  return states;
}

SpikingNetwork convert_policy(const Environment& env, const MlpPolicy& policy,
                              const ExperimentConfig& config) {
  std::vector<Eigen::VectorXd> states =
      calibration_observations(env, policy, config);
  return convert(policy, config.neuron_kind(), config.T,
                 calibrate_thresholds(policy, states));
}

}  // namespace snnloop
