#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "snnloop/mlp.hpp"

namespace snnloop {

struct BcConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 256;
  int epochs = 50;
  std::uint64_t seed = 0;
};

// Column-per-sample layout so mini-batches are plain block views.
struct BcDataset {
  Eigen::MatrixXd obs;      // obs_dim x N
  Eigen::MatrixXd actions;  // act_dim x N

  std::int64_t size() const { return obs.cols(); }
};

struct BcResult {
  MlpPolicy policy;
  double final_mse;
};

// Fresh network with uniform fan-based weight init (+-sqrt(6/(in+out)))
// and zero biases. `widths` is the full chain obs_dim..act_dim.
MlpPolicy init_policy(const std::vector<int>& widths, double action_scale,
                      std::uint64_t seed);

// Mean over samples and action channels of the squared action error.
double mse(const MlpPolicy& policy, const BcDataset& data);

// Mini-batch SGD with momentum on the MSE loss. Deterministic given
// config.seed. Throws TrainingDiverged if the loss goes non-finite.
BcResult bc_train(const BcDataset& data, const std::vector<int>& arch,
                  double action_scale, const BcConfig& config);

// Backprop gradients of the single-sample loss
// |forward(obs) - target|^2 / act_dim with respect to every parameter.
struct PolicyGradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

PolicyGradients loss_gradients(const MlpPolicy& policy,
                               const Eigen::VectorXd& obs,
                               const Eigen::VectorXd& target);

// Max over all parameters of |g_analytic - g_fd| / max(1, |g_fd|), with
// g_fd from central finite differences (h = 1e-5) of the same loss.
double gradient_check(const MlpPolicy& policy, const Eigen::VectorXd& obs,
                      const Eigen::VectorXd& target);

}  // namespace snnloop
