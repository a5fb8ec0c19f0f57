#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "snnloop/crpi.hpp"
#include "snnloop/env.hpp"
#include "snnloop/mlp.hpp"
#include "snnloop/spiking.hpp"

namespace snnloop {

// Anything that can drive a closed loop. Stateful policies reset per
// episode in begin_episode(); act() receives both the raw environment state
// (for analytic controllers) and the observation (for networks).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode() {}
  virtual Eigen::VectorXd act(const EnvState& state,
                              const Eigen::VectorXd& obs) = 0;
};

class AnnPolicy final : public Policy {
 public:
  explicit AnnPolicy(const MlpPolicy& net) : net_(&net) {}
  Eigen::VectorXd act(const EnvState&, const Eigen::VectorXd& obs) override {
    return net_->forward(obs);
  }

 private:
  const MlpPolicy* net_;
};

class ExpertPolicy final : public Policy {
 public:
  explicit ExpertPolicy(const Environment& env) : env_(&env) {}
  Eigen::VectorXd act(const EnvState& state, const Eigen::VectorXd&) override {
    return env_->expert_action(state);
  }

 private:
  const Environment* env_;
};

// Owns an episode-local copy of the converted network. With an alpha the
// residual carry wraps every decision step; without one each step starts
// from the plain theta/2 initialization.
class SnnPolicy final : public Policy {
 public:
  SnnPolicy(SpikingNetwork net, std::optional<double> alpha,
            bool symmetric_clip = false)
      : net_(std::move(net)), alpha_(alpha), symmetric_clip_(symmetric_clip) {}

  void begin_episode() override {
    if (alpha_) {
      crpi_.emplace(*alpha_, symmetric_clip_);
    } else {
      crpi_.reset();
    }
  }

  Eigen::VectorXd act(const EnvState&, const Eigen::VectorXd& obs) override {
    return infer(net_, obs, crpi_ ? &*crpi_ : nullptr);
  }

  SpikingNetwork& network() { return net_; }
  const SpikingNetwork& network() const { return net_; }
  const std::optional<CrpiState>& carry() const { return crpi_; }

 private:
  SpikingNetwork net_;
  std::optional<double> alpha_;
  bool symmetric_clip_;
  std::optional<CrpiState> crpi_;
};

}  // namespace snnloop
