#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace snnloop {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out

  int in() const { return static_cast<int>(weights.cols()); }
  int out() const { return static_cast<int>(weights.rows()); }
};

// Dense ReLU network with a tanh-squashed, scaled output:
//   h^0 = obs;  h^l = relu(W^l h^{l-1} + b^l)  for hidden layers
//   action = action_scale * tanh(W^L h^{L-1} + b^L)
// Immutable after construction; forward passes are const and thread-safe.
class MlpPolicy {
 public:
  MlpPolicy(std::vector<DenseLayer> layers, double action_scale);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  int obs_dim() const { return layers_.front().in(); }
  int act_dim() const { return layers_.back().out(); }
  int num_hidden() const { return static_cast<int>(layers_.size()) - 1; }
  double action_scale() const { return action_scale_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& obs) const;

  // Post-ReLU activation of every hidden layer, in order. Used for
  // threshold calibration.
  std::vector<Eigen::VectorXd> forward_with_activations(
      const Eigen::VectorXd& obs) const;

 private:
  void check_obs(const Eigen::VectorXd& obs) const;

  std::vector<DenseLayer> layers_;
  double action_scale_;
};

// Floating-point operations of one forward pass: a multiply-accumulate is
// 2 FLOPs, a bias add 1, the final tanh 1 per output channel. The scale
// multiply is not counted.
std::int64_t count_flops(const MlpPolicy& policy);

}  // namespace snnloop
