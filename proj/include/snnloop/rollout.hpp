#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnloop/env.hpp"
#include "snnloop/policy.hpp"

namespace snnloop {

struct Trajectory {
  std::vector<EnvState> states;  // s_0 .. s_{K-1}
  std::vector<Eigen::VectorXd> observations;
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> rewards;
  std::uint64_t seed = 0;
  std::string policy_tag;

  int length() const { return static_cast<int>(rewards.size()); }
  double total_return() const;
};

// Standard closed loop for `horizon` decision steps; deterministic given
// the seed. A numeric fault inside the policy or dynamics is re-thrown
// with the decision-step index attached.
Trajectory rollout(const Environment& env, Policy& policy, int horizon,
                   std::uint64_t seed, const std::string& tag = "");

}  // namespace snnloop
