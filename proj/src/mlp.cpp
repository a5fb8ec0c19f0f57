#include "snnloop/mlp.hpp"

#include <cmath>
#include <utility>

#include "snnloop/errors.hpp"

namespace snnloop {

MlpPolicy::MlpPolicy(std::vector<DenseLayer> layers, double action_scale)
    : layers_(std::move(layers)), action_scale_(action_scale) {
  if (layers_.empty()) {
    throw ValidationError("policy must have at least one layer");
  }
  if (!(action_scale_ > 0.0) || !std::isfinite(action_scale_)) {
    throw ValidationError("action_scale must be positive and finite");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.in() <= 0 || layer.out() <= 0) {
      throw ValidationError("layer " + std::to_string(l) +
                            " has a zero dimension");
    }
    if (layer.bias.size() != layer.out()) {
      throw ValidationError("layer " + std::to_string(l) +
                            ": bias length does not match weight rows");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw ValidationError("layer " + std::to_string(l) +
                            " contains non-finite parameters");
    }
    if (l > 0 && layers_[l - 1].out() != layer.in()) {
      throw ValidationError(
          "layer dimension chain broken between layers " +
          std::to_string(l - 1) + " and " + std::to_string(l) + " (" +
          std::to_string(layers_[l - 1].out()) + " vs " +
          std::to_string(layer.in()) + ")");
    }
  }
}

void MlpPolicy::check_obs(const Eigen::VectorXd& obs) const {
  if (obs.size() != obs_dim()) {
    throw ValidationError("observation has dimension " +
                          std::to_string(obs.size()) + ", expected " +
                          std::to_string(obs_dim()));
  }
  if (!obs.allFinite()) {
    throw ValidationError("observation contains non-finite values");
  }
}

Eigen::VectorXd MlpPolicy::forward(const Eigen::VectorXd& obs) const {
  check_obs(obs);
  Eigen::VectorXd h = obs;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    h = (layers_[l].weights * h + layers_[l].bias).cwiseMax(0.0);
  }
  Eigen::VectorXd pre = layers_.back().weights * h + layers_.back().bias;
  return action_scale_ * pre.array().tanh();
}

std::vector<Eigen::VectorXd> MlpPolicy::forward_with_activations(
    const Eigen::VectorXd& obs) const {
  check_obs(obs);
  std::vector<Eigen::VectorXd> activations;
  activations.reserve(layers_.size() - 1);
  Eigen::VectorXd h = obs;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    h = (layers_[l].weights * h + layers_[l].bias).cwiseMax(0.0);
    activations.push_back(h);
  }
  return activations;
}

std::int64_t count_flops(const MlpPolicy& policy) {
  std::int64_t flops = 0;
  for (const DenseLayer& layer : policy.layers()) {
    flops += 2ll * layer.in() * layer.out() + layer.out();
  }
  return flops + policy.act_dim();
}

}  // namespace snnloop
