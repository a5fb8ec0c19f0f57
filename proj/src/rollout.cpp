#include "snnloop/rollout.hpp"

#include <numeric>

#include "snnloop/errors.hpp"

namespace snnloop {

double Trajectory::total_return() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

Trajectory rollout(const Environment& env, Policy& policy, int horizon,
                   std::uint64_t seed, const std::string& tag) {
  if (horizon < 1) throw ValidationError("rollout horizon must be >= 1");
  Trajectory traj;
  traj.seed = seed;
  traj.policy_tag = tag;
  traj.states.reserve(static_cast<std::size_t>(horizon));
  traj.observations.reserve(static_cast<std::size_t>(horizon));
  traj.actions.reserve(static_cast<std::size_t>(horizon));
  traj.rewards.reserve(static_cast<std::size_t>(horizon));

  policy.begin_episode();
  EnvState state = env.reset(seed);
  for (int k = 0; k < horizon; ++k) {
    try {
      Eigen::VectorXd obs = env.observe(state);
      Eigen::VectorXd action = policy.act(state, obs);
      auto [next, reward] = env.step(state, action);
      traj.states.push_back(state);
      traj.observations.push_back(std::move(obs));
      traj.actions.push_back(std::move(action));
      traj.rewards.push_back(reward);
      state = next;
    } catch (const NumericFault& e) {
      throw NumericFault("decision step " + std::to_string(k) + ": " +
                         e.what());
    }
  }
  return traj;
}

}  // namespace snnloop
