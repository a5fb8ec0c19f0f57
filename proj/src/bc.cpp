#include "snnloop/bc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "snnloop/errors.hpp"
#include "snnloop/rng.hpp"

namespace snnloop {
namespace {

struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

Gradients zeros_like(const std::vector<DenseLayer>& layers) {
  Gradients g;
  for (const DenseLayer& layer : layers) {
    g.dw.push_back(Eigen::MatrixXd::Zero(layer.out(), layer.in()));
    g.db.push_back(Eigen::VectorXd::Zero(layer.out()));
  }
  return g;
}

// Forward a batch (columns = samples), keeping post-activation values of
// every layer for the backward pass. Returns the scaled tanh output.
Eigen::MatrixXd forward_batch(const std::vector<DenseLayer>& layers,
                              double scale, const Eigen::MatrixXd& x,
                              std::vector<Eigen::MatrixXd>* post) {
  Eigen::MatrixXd h = x;
  if (post) post->clear();
  const std::size_t last = layers.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    h = ((layers[l].weights * h).colwise() + layers[l].bias).cwiseMax(0.0);
    if (post) post->push_back(h);
  }
  Eigen::MatrixXd out =
      ((layers[last].weights * h).colwise() + layers[last].bias)
          .array()
          .tanh();
  if (post) post->push_back(out);  // tanh(z), pre-scale
  return scale * out;
}

// Batch-mean gradient of L = mean_samples mean_channels (a - t)^2.
double backward_batch(const std::vector<DenseLayer>& layers, double scale,
                      const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
                      Gradients* grads) {
  std::vector<Eigen::MatrixXd> post;
  Eigen::MatrixXd action = forward_batch(layers, scale, x, &post);

  const double n = static_cast<double>(x.cols());
  const double m = static_cast<double>(target.rows());
  Eigen::MatrixXd err = action - target;
  const double loss = err.squaredNorm() / (n * m);

  const std::size_t last = layers.size() - 1;
  const Eigen::MatrixXd& th = post[last];  // tanh(z_last)
  // d loss / d z_last through a = scale * tanh(z)
  Eigen::MatrixXd delta =
      (2.0 / (n * m)) * err.array() * scale * (1.0 - th.array().square());

  for (std::size_t li = layers.size(); li-- > 0;) {
    const Eigen::MatrixXd& input = (li == 0) ? x : post[li - 1];
    grads->dw[li] = delta * input.transpose();
    grads->db[li] = delta.rowwise().sum();
    if (li > 0) {
      delta = (layers[li].weights.transpose() * delta).array() *
              (post[li - 1].array() > 0.0).cast<double>();
    }
  }
  return loss;
}

std::vector<DenseLayer> init_layers(const std::vector<int>& widths,
                                    std::uint64_t seed) {
  if (widths.size() < 2) {
    throw ValidationError("architecture needs at least input and output widths");
  }
  std::mt19937_64 rng = make_rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    if (in <= 0 || out <= 0) {
      throw ValidationError("architecture widths must be positive");
    }
    const double bound = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer;
    layer.weights = Eigen::MatrixXd::NullaryExpr(
        out, in, [&]() { return dist(rng); });
    layer.bias = Eigen::VectorXd::Zero(out);
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace

MlpPolicy init_policy(const std::vector<int>& widths, double action_scale,
                      std::uint64_t seed) {
  return MlpPolicy(init_layers(widths, seed), action_scale);
}

double mse(const MlpPolicy& policy, const BcDataset& data) {
  if (data.size() == 0) throw ValidationError("dataset is empty");
  Eigen::MatrixXd out = forward_batch(policy.layers(), policy.action_scale(),
                                      data.obs, nullptr);
  return (out - data.actions).squaredNorm() /
         (static_cast<double>(data.size()) * data.actions.rows());
}

BcResult bc_train(const BcDataset& data, const std::vector<int>& arch,
                  double action_scale, const BcConfig& config) {
  if (data.size() == 0) throw ValidationError("dataset is empty");
  if (data.obs.rows() != arch.front() || data.actions.rows() != arch.back()) {
    throw ValidationError("dataset dimensions do not match architecture");
  }
  if (!(config.learning_rate >= 0.0) ||
      !std::isfinite(config.learning_rate)) {
    throw ValidationError("learning_rate must be finite and >= 0");
  }
  if (config.momentum < 0.0 || config.momentum >= 1.0) {
    throw ValidationError("momentum must be in [0, 1)");
  }
  if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if ((data.actions.cwiseAbs().array() > action_scale).any()) {
    throw ValidationError("dataset actions exceed action_scale");
  }

  std::vector<DenseLayer> layers =
      init_layers(arch, derive_seed(config.seed, seed_stream::kTrainer));
  Gradients velocity = zeros_like(layers);
  Gradients grads = zeros_like(layers);

  const std::int64_t n = data.size();
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng =
      make_rng(derive_seed(config.seed, seed_stream::kTrainer, 1));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::int64_t start = 0; start < n; start += config.batch_size) {
      const std::int64_t b = std::min<std::int64_t>(config.batch_size,
                                                    n - start);
      Eigen::MatrixXd bx(data.obs.rows(), b);
      Eigen::MatrixXd bt(data.actions.rows(), b);
      for (std::int64_t i = 0; i < b; ++i) {
        bx.col(i) = data.obs.col(order[static_cast<std::size_t>(start + i)]);
        bt.col(i) =
            data.actions.col(order[static_cast<std::size_t>(start + i)]);
      }
      const double loss = backward_batch(layers, action_scale, bx, bt, &grads);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("training loss became non-finite at epoch " +
                               std::to_string(epoch));
      }
      for (std::size_t l = 0; l < layers.size(); ++l) {
        velocity.dw[l] = config.momentum * velocity.dw[l] + grads.dw[l];
        velocity.db[l] = config.momentum * velocity.db[l] + grads.db[l];
        layers[l].weights -= config.learning_rate * velocity.dw[l];
        layers[l].bias -= config.learning_rate * velocity.db[l];
      }
    }
  }

  MlpPolicy policy(std::move(layers), action_scale);
  const double final_mse = mse(policy, data);
  if (!std::isfinite(final_mse)) {
    throw TrainingDiverged("final MSE non-finite after epoch " +
                           std::to_string(config.epochs - 1));
  }
  return BcResult{std::move(policy), final_mse};
}

PolicyGradients loss_gradients(const MlpPolicy& policy,
                               const Eigen::VectorXd& obs,
                               const Eigen::VectorXd& target) {
  Gradients grads = zeros_like(policy.layers());
  backward_batch(policy.layers(), policy.action_scale(), obs, target, &grads);
  return PolicyGradients{std::move(grads.dw), std::move(grads.db)};
}

double gradient_check(const MlpPolicy& policy, const Eigen::VectorXd& obs,
                      const Eigen::VectorXd& target) {
  const double scale = policy.action_scale();
  std::vector<DenseLayer> layers = policy.layers();
  Gradients grads = zeros_like(layers);
  backward_batch(layers, scale, obs, target, &grads);

  const double h = 1e-5;
  auto loss_at = [&]() {
    Eigen::MatrixXd out = forward_batch(layers, scale, obs, nullptr);
    return (out - target).squaredNorm() / static_cast<double>(target.size());
  };

  double worst = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = loss_at();
    param = saved - h;
    const double down = loss_at();
    param = saved;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst,
                     std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
  };

  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int r = 0; r < layers[l].weights.rows(); ++r) {
      for (int c = 0; c < layers[l].weights.cols(); ++c) {
        probe(layers[l].weights(r, c), grads.dw[l](r, c));
      }
    }
    for (int r = 0; r < layers[l].bias.size(); ++r) {
      probe(layers[l].bias(r), grads.db[l](r));
    }
  }
  return worst;
}

}  // namespace snnloop
