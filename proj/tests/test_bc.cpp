#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "snnloop/bc.hpp"
#include "snnloop/errors.hpp"
#include "snnloop/rng.hpp"

using namespace snnloop;

namespace {

// Linear target a = clip(-0.6 p - 0.9 v) over a box of states.
BcDataset linear_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> p_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> v_dist(-0.5, 0.5);
  BcDataset data;
  data.obs.resize(2, n);
  data.actions.resize(1, n);
  for (int i = 0; i < n; ++i) {
    const double p = p_dist(rng);
    const double v = v_dist(rng);
    data.obs.col(i) << p, v;
    data.actions(0, i) = std::clamp(-0.6 * p - 0.9 * v, -1.0, 1.0);
  }
  return data;
}

}  // namespace

TEST_CASE("trainer fits a clipped linear controller") {
  BcDataset data = linear_dataset(4096, 11);
  BcConfig cfg;
  cfg.seed = 3;
  BcResult result = bc_train(data, {2, 64, 64, 1}, 1.0, cfg);
  CHECK(result.final_mse < 1e-3);
}

TEST_CASE("a single repeated pair is memorized") {
  BcDataset data;
  data.obs = Eigen::MatrixXd::Constant(2, 64, 0.4);
  data.actions = Eigen::MatrixXd::Constant(1, 64, 0.3);
  BcConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-2;
  cfg.seed = 5;
  BcResult result = bc_train(data, {2, 8, 1}, 1.0, cfg);
  CHECK(result.final_mse < 1e-8);
}

TEST_CASE("zero learning rate leaves the initialization untouched") {
  BcDataset data = linear_dataset(256, 4);
  BcConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.seed = 17;
  BcResult result = bc_train(data, {2, 8, 1}, 1.0, cfg);
  MlpPolicy reference =
      init_policy({2, 8, 1}, 1.0,
                  derive_seed(cfg.seed, seed_stream::kTrainer));
  CHECK(result.final_mse == mse(reference, data));
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd obs = data.obs.col(i);
    CHECK(result.policy.forward(obs) == reference.forward(obs));
  }
}

TEST_CASE("divergence reports the failing epoch") {
  BcDataset data = linear_dataset(256, 4);
  BcConfig cfg;
  cfg.learning_rate = 1e9;
  cfg.epochs = 10;
  try {
    bc_train(data, {2, 8, 1}, 1.0, cfg);
    FAIL("expected TrainingDiverged");
  } catch (const TrainingDiverged& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("empty dataset and invalid config are rejected") {
  BcDataset empty;
  empty.obs.resize(2, 0);
  empty.actions.resize(1, 0);
  CHECK_THROWS_AS(bc_train(empty, {2, 4, 1}, 1.0, BcConfig{}),
                  ValidationError);
  BcDataset data = linear_dataset(16, 1);
  BcConfig bad;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(bc_train(data, {2, 4, 1}, 1.0, bad), ValidationError);
  BcConfig bad_batch;
  bad_batch.batch_size = 0;
  CHECK_THROWS_AS(bc_train(data, {2, 4, 1}, 1.0, bad_batch), ValidationError);
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MlpPolicy policy = init_policy({2, 8, 1}, 1.0, 7000 + trial);
    Eigen::VectorXd obs(2), target(1);
    obs << dist(rng), dist(rng);
    target << 0.8 * dist(rng);
    CHECK(gradient_check(policy, obs, target) < 1e-5);
  }
}

TEST_CASE("gradient check at a zero-loss configuration") {
  MlpPolicy policy = init_policy({2, 8, 1}, 1.0, 41);
  Eigen::VectorXd obs(2);
  obs << 0.3, -0.2;
  Eigen::VectorXd target = policy.forward(obs);  // loss is exactly zero
  CHECK(gradient_check(policy, obs, target) < 1e-7);
}

TEST_CASE("single-layer gradient matches the closed form") {
  // One linear layer + tanh head: the loss gradient has the closed form
  //   dL/dz = (2/m) (s tanh(z) - t) .* s (1 - tanh(z)^2),
  //   dL/dW = dL/dz obs',  dL/db = dL/dz
  // computed here independently of the backprop code.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double scale = 1.5;
  MlpPolicy policy = init_policy({3, 2}, scale, 77);
  Eigen::VectorXd obs(3), target(2);
  for (int i = 0; i < 3; ++i) obs[i] = dist(rng);
  for (int i = 0; i < 2; ++i) target[i] = dist(rng);

  Eigen::VectorXd z =
      policy.layers()[0].weights * obs + policy.layers()[0].bias;
  Eigen::ArrayXd th = z.array().tanh();
  Eigen::VectorXd dz =
      ((2.0 / 2.0) * (scale * th - target.array()) * scale *
       (1.0 - th.square()))
          .matrix();
  Eigen::MatrixXd dw_closed = dz * obs.transpose();

  PolicyGradients analytic = loss_gradients(policy, obs, target);
  CHECK((analytic.dw[0] - dw_closed).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((analytic.db[0] - dz).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("trainer is deterministic given the seed") {
  BcDataset data = linear_dataset(512, 9);
  BcConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 123;
  BcResult a = bc_train(data, {2, 16, 1}, 1.0, cfg);
  BcResult b = bc_train(data, {2, 16, 1}, 1.0, cfg);
  CHECK(a.final_mse == b.final_mse);
  Eigen::VectorXd obs(2);
  obs << 0.2, -0.1;
  CHECK(a.policy.forward(obs) == b.policy.forward(obs));
}
