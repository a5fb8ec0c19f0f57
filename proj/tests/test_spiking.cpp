#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "snnloop/bc.hpp"
#include "snnloop/errors.hpp"
#include "snnloop/spiking.hpp"

using namespace snnloop;

namespace {

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

SpikingLayer single_channel_layer(double theta) {
  SpikingLayer layer;
  layer.weights = Eigen::MatrixXd::Identity(1, 1);
  layer.bias = Eigen::VectorXd::Zero(1);
  layer.theta = vec1(theta);
  layer.memory_bias = Eigen::VectorXd::Zero(1);
  layer.v = Eigen::VectorXd::Zero(1);
  layer.c = Eigen::VectorXd::Zero(1);
  layer.m_r = Eigen::VectorXd::Zero(1);
  layer.sum_x = Eigen::VectorXd::Zero(1);
  layer.v_start = Eigen::VectorXd::Zero(1);
  return layer;
}

MlpPolicy identity_1_1_1() {
  DenseLayer l{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)};
  return MlpPolicy({l, l}, 1.0);
}

std::vector<Eigen::VectorXd> random_obs_set(int n, int dim,
                                            std::uint64_t seed,
                                            double span = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-span, span);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v[j] = dist(rng);
    out.push_back(v);
  }
  return out;
}

double max_action_error(const MlpPolicy& ann, const NeuronKind& kind, int T,
                        const std::vector<Eigen::VectorXd>& theta,
                        const std::vector<Eigen::VectorXd>& obs_set) {
  SpikingNetwork net = convert(ann, kind, T, theta);
  double worst = 0.0;
  for (const Eigen::VectorXd& obs : obs_set) {
    worst = std::max(
        worst, (net.infer(obs) - ann.forward(obs)).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("threshold calibration takes the channel maximum with a floor") {
  // 1->3 layer whose three channels see activations {0.2,0.7,0.4}, a dead
  // channel, and a single-state case.
  DenseLayer l1{Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(2)};
  l1.weights << 1.0, 0.0;  // channel 1 passes input through, channel 2 dead
  DenseLayer l2{Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1)};
  MlpPolicy policy({l1, l2}, 1.0);

  std::vector<Eigen::VectorXd> states = {vec1(0.2), vec1(0.7), vec1(0.4)};
  std::vector<Eigen::VectorXd> theta = calibrate_thresholds(policy, states);
  CHECK(theta[0][0] == 0.7);
  CHECK(theta[0][1] == 1e-6);

  std::vector<Eigen::VectorXd> one = {vec1(0.35)};
  CHECK(calibrate_thresholds(policy, one)[0][0] == 0.35);

  CHECK_THROWS_AS(calibrate_thresholds(policy, {}), ValidationError);
}

TEST_CASE("integrate-and-fire single steps") {
  SpikingLayer layer = single_channel_layer(1.0);
  layer.v = vec1(0.5);
  Eigen::VectorXd x = if_step(layer, vec1(0.5));
  CHECK(x[0] == 1.0);
  CHECK(layer.v[0] == 0.0);
  CHECK(layer.spike_events == 1);

  layer = single_channel_layer(1.0);
  layer.v = vec1(0.5);
  x = if_step(layer, vec1(0.4));
  CHECK(x[0] == 0.0);
  CHECK(layer.v[0] == doctest::Approx(0.9));

  layer = single_channel_layer(1.0);
  for (int t = 0; t < 100; ++t) {
    CHECK(if_step(layer, vec1(0.0))[0] == 0.0);
  }
  CHECK(layer.spike_events == 0);
}

TEST_CASE("signed neuron steps under the guarded negative rule") {
  SpikingLayer layer = single_channel_layer(1.0);
  Eigen::VectorXd x = snm_step(layer, vec1(1.2));
  CHECK(x[0] == 1.0);
  CHECK(layer.v[0] == doctest::Approx(0.2));
  CHECK(layer.c[0] == 1.0);

  x = snm_step(layer, vec1(-1.7));  // m = 0.2 - 1.7 = -1.5, c = 1
  CHECK(x[0] == -1.0);
  CHECK(layer.v[0] == doctest::Approx(-0.5));
  CHECK(layer.c[0] == 0.0);

  // Without cumulative credit the negative spike is suppressed.
  layer = single_channel_layer(1.0);
  x = snm_step(layer, vec1(-1.5));
  CHECK(x[0] == 0.0);
  CHECK(layer.v[0] == doctest::Approx(-1.5));
  CHECK(layer.c[0] == 0.0);
}

TEST_CASE("literal signed rule spikes negative below threshold") {
  SpikingLayer layer = single_channel_layer(1.0);
  Eigen::VectorXd x = snm_step(layer, vec1(0.5), /*literal_rule=*/true);
  CHECK(x[0] == -1.0);  // m=0.5 <= theta and c=0 >= -theta
  CHECK(layer.c[0] == -1.0);
}

TEST_CASE("multi-threshold firing on the documented examples") {
  // theta=1, n=2: membrane 0.6 rounds to 0.5, 0.8 rounds to 1, 0.3 falls
  // below the smallest band.
  SpikingLayer layer = single_channel_layer(1.0);
  Eigen::VectorXd x = mt_step(layer, vec1(0.6), 2);
  CHECK(x[0] == 0.5);
  CHECK(layer.v[0] == doctest::Approx(0.1));

  layer = single_channel_layer(1.0);
  x = mt_step(layer, vec1(0.8), 2);
  CHECK(x[0] == 1.0);
  CHECK(layer.v[0] == doctest::Approx(-0.2));

  layer = single_channel_layer(1.0);
  x = mt_step(layer, vec1(0.3), 2);
  CHECK(x[0] == 0.0);
  CHECK(layer.v[0] == doctest::Approx(0.3));
}

TEST_CASE("multi-threshold band edges are half-open, top band saturates") {
  SpikingLayer layer = single_channel_layer(1.0);
  CHECK(mt_step(layer, vec1(0.75), 2)[0] == 1.0);  // 0.75 included
  layer = single_channel_layer(1.0);
  CHECK(mt_step(layer, vec1(1.5), 2)[0] == 1.0);  // saturates, still theta
  layer = single_channel_layer(1.0);
  CHECK(mt_step(layer, vec1(37.0), 2)[0] == 1.0);
  layer = single_channel_layer(1.0);
  CHECK(mt_step(layer, vec1(0.375), 2)[0] == 0.5);
  layer = single_channel_layer(1.0);
  CHECK(mt_step(layer, vec1(std::nextafter(0.375, 0.0)), 2)[0] == 0.0);
}

TEST_CASE("multi-threshold step matches the interval-scan oracle") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> m_dist(-4.0, 4.0);
  std::uniform_real_distribution<double> c_dist(0.0, 4.0);
  std::uniform_real_distribution<double> theta_dist(0.25, 2.5);
  for (int trial = 0; trial < 10000; ++trial) {
    const double theta = theta_dist(rng);
    const double m = m_dist(rng);
    const double c = c_dist(rng);
    const int n = 1 + static_cast<int>(rng() % 4);

    SpikingLayer layer = single_channel_layer(theta);
    layer.v = vec1(m);
    layer.c = vec1(c);
    const double got = mt_step(layer, vec1(0.0), n)[0];
    const double want = testing::mt_oracle_output(m, c, theta, n);
    CHECK(got == want);  // exact
    CHECK(layer.c[0] >= 0.0);
    CHECK(layer.v[0] == m - got);
  }
}

TEST_CASE("differential coding memory updates") {
  NeuronKind kind = NeuronKind::dc(NeuronKind::Base::IF);

  // No spike at t=1: memory absorbs the full drive.
  SpikingLayer layer = single_channel_layer(1.0);
  Eigen::VectorXd x = dc_step(layer, vec1(0.3), 1, kind);
  CHECK(x[0] == 0.0);
  CHECK(layer.m_r[0] == doctest::Approx(0.3));

  // Output tracking the drive exactly keeps the memory constant.
  layer = single_channel_layer(1.0);
  layer.m_r = vec1(0.25);
  layer.v = vec1(0.75);  // m = 0.25 + 0.75(drive) + 0.75 = ...
  // drive equal to theta guarantees a spike of the same size each step.
  for (int t = 1; t <= 5; ++t) {
    Eigen::VectorXd out = dc_step(layer, vec1(1.0), t, kind);
    CHECK(out[0] == 1.0);
    CHECK(layer.m_r[0] == doctest::Approx(0.25));
  }

  CHECK_THROWS_AS(dc_step(layer, vec1(0.1), 0, kind), ValidationError);
}

TEST_CASE("conversion folds biases into differential memory") {
  MlpPolicy policy = init_policy({2, 6, 1}, 1.0, 11);
  // Give the hidden layer a visible bias.
  std::vector<DenseLayer> layers = policy.layers();
  layers[0].bias = Eigen::VectorXd::LinSpaced(6, -0.3, 0.4);
  MlpPolicy biased(layers, 1.0);

  std::vector<Eigen::VectorXd> theta = {Eigen::VectorXd::Constant(6, 1.0)};
  SpikingNetwork dc_net =
      convert(biased, NeuronKind::dc(NeuronKind::Base::MT, 4), 8, theta);
  CHECK(dc_net.hidden(0).bias.isZero(0.0));
  CHECK(dc_net.hidden(0).memory_bias == layers[0].bias);
  dc_net.begin_decision_step();
  CHECK(dc_net.hidden(0).m_r == layers[0].bias);

  SpikingNetwork if_net = convert(biased, NeuronKind::if_neuron(), 8, theta);
  CHECK(if_net.hidden(0).bias == layers[0].bias);
}

TEST_CASE("conversion validates shapes and bounds") {
  MlpPolicy policy = init_policy({2, 6, 1}, 1.0, 13);
  std::vector<Eigen::VectorXd> theta = {Eigen::VectorXd::Constant(6, 1.0)};
  CHECK_THROWS_AS(convert(policy, NeuronKind::if_neuron(), 0, theta),
                  ValidationError);
  std::vector<Eigen::VectorXd> bad = {Eigen::VectorXd::Constant(5, 1.0)};
  CHECK_THROWS_AS(convert(policy, NeuronKind::if_neuron(), 4, bad),
                  ValidationError);
  CHECK_THROWS_AS(convert(policy, NeuronKind::if_neuron(), 4, {}),
                  ValidationError);
  std::vector<Eigen::VectorXd> nonpos = {Eigen::VectorXd::Zero(6)};
  CHECK_THROWS_AS(convert(policy, NeuronKind::if_neuron(), 4, nonpos),
                  ValidationError);
  CHECK_THROWS_AS(NeuronKind::dc(NeuronKind::Base::SNM).validate(),
                  ValidationError);
}

TEST_CASE("zero-weight conversion emits zero actions") {
  DenseLayer l1{Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4)};
  DenseLayer l2{Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Zero(1)};
  MlpPolicy policy({l1, l2}, 1.0);
  std::vector<Eigen::VectorXd> theta = {Eigen::VectorXd::Constant(4, 1e-6)};
  SpikingNetwork net = convert(policy, NeuronKind::if_neuron(), 8, theta);
  Eigen::VectorXd obs(3);
  obs << 1.0, -2.0, 0.5;
  CHECK(net.infer(obs)[0] == 0.0);
}

TEST_CASE("identity chain reproduces the hand simulation") {
  MlpPolicy ann = identity_1_1_1();
  std::vector<Eigen::VectorXd> theta = {vec1(1.0)};
  SpikingNetwork net = convert(ann, NeuronKind::if_neuron(), 4, theta);

  // v0=0.5, input 0.5: membranes 1.0 (spike), 0.5, 1.0 (spike), 0.5.
  Eigen::VectorXd action = net.infer(vec1(0.5));
  CHECK(action[0] == std::tanh(0.5));
  CHECK(action == ann.forward(vec1(0.5)));
  CHECK(net.hidden(0).sum_x[0] == 2.0);
  CHECK(net.hidden(0).v[0] == doctest::Approx(0.5));

  // Never-firing input matches the ANN exactly as well.
  CHECK(net.infer(vec1(-1.0))[0] == 0.0);
}

TEST_CASE("synaptic operation counting") {
  // Zero-weight net: only the input injection counts, 3 channels x T.
  DenseLayer l1{Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4)};
  DenseLayer l2{Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Zero(1)};
  MlpPolicy policy({l1, l2}, 1.0);
  std::vector<Eigen::VectorXd> theta = {Eigen::VectorXd::Constant(4, 1e-6)};
  SpikingNetwork net = convert(policy, NeuronKind::if_neuron(), 8, theta);
  net.infer(Eigen::VectorXd::Zero(3));
  CHECK(count_sops(net) == 24);

  // Identity chain at T=4: two hidden spikes with fan-out 1 plus 4 input
  // injections.
  SpikingNetwork ident =
      convert(identity_1_1_1(), NeuronKind::if_neuron(), 4, {vec1(1.0)});
  ident.infer(vec1(0.5));
  CHECK(count_sops(ident) == 6);

  ident.reset_counters();
  CHECK(count_sops(ident) == 0);
  CHECK(ident.inference_count() == 0);
}

TEST_CASE("rate-coding identity: layer error bounded by theta/T") {
  // A single calibrated IF layer driven by constant currents with
  // pre-activations inside [0, theta) satisfies
  // |avg output - relu(pre)| <= theta / T for every T.
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> w_dist(-0.2, 0.2);
  std::uniform_real_distribution<double> b_dist(0.1, 0.4);
  std::uniform_real_distribution<double> obs_dist(-1.0, 1.0);

  DenseLayer layer;
  layer.weights = Eigen::MatrixXd::NullaryExpr(
      6, 4, [&]() { return w_dist(rng); });
  layer.bias = Eigen::VectorXd::NullaryExpr(6, [&]() { return b_dist(rng); });
  DenseLayer head{Eigen::MatrixXd::Identity(6, 6), Eigen::VectorXd::Zero(6)};
  MlpPolicy policy({layer, head}, 1.0);

  // Calibrate on a wide sample, then keep test inputs whose pre-activations
  // lie strictly inside [0, theta) channel-wise.
  std::vector<Eigen::VectorXd> calib = random_obs_set(500, 4, 111, 1.5);
  std::vector<Eigen::VectorXd> theta = calibrate_thresholds(policy, calib);

  std::vector<Eigen::VectorXd> inputs;
  std::mt19937_64 rng2(505);
  int attempts = 0;
  while (inputs.size() < 200) {
    REQUIRE(++attempts < 100000);
    Eigen::VectorXd obs(4);
    for (int i = 0; i < 4; ++i) obs[i] = obs_dist(rng2);
    Eigen::VectorXd pre = layer.weights * obs + layer.bias;
    if ((pre.array() >= 0.0).all() &&
        (pre.array() < theta[0].array()).all()) {
      inputs.push_back(obs);
    }
  }

  for (int T = 1; T <= 256; T *= 2) {
    SpikingNetwork net = convert(policy, NeuronKind::if_neuron(), T, theta);
    for (const Eigen::VectorXd& obs : inputs) {
      net.infer(obs);
      Eigen::VectorXd avg = net.hidden(0).sum_x / static_cast<double>(T);
      Eigen::VectorXd relu = (layer.weights * obs + layer.bias).cwiseMax(0.0);
      Eigen::ArrayXd bound = net.hidden(0).theta.array() / T;
      CHECK(((avg - relu).cwiseAbs().array() <= bound).all());
    }
  }
}

TEST_CASE("T=1 output is a coarse quantization within theta per channel") {
  std::mt19937_64 rng(606);
  MlpPolicy policy = init_policy({3, 10, 2}, 1.0, 42);
  std::vector<Eigen::VectorXd> obs_set = random_obs_set(100, 3, 707);
  std::vector<Eigen::VectorXd> theta = calibrate_thresholds(policy, obs_set);
  SpikingNetwork net = convert(policy, NeuronKind::if_neuron(), 1, theta);
  for (const Eigen::VectorXd& obs : obs_set) {
    net.infer(obs);
    Eigen::VectorXd avg = net.hidden(0).sum_x;  // T = 1
    Eigen::VectorXd relu = policy.forward_with_activations(obs)[0];
    CHECK(((avg - relu).cwiseAbs().array() <= theta[0].array()).all());
  }
}

TEST_CASE("converted networks converge to the source policy as T grows") {
  MlpPolicy policy = init_policy({3, 24, 24, 1}, 1.0, 2025);
  std::vector<Eigen::VectorXd> obs_set = random_obs_set(100, 3, 31337);
  std::vector<Eigen::VectorXd> theta = calibrate_thresholds(policy, obs_set);

  SUBCASE("IF error is non-increasing and small at T=1024") {
    double prev = std::numeric_limits<double>::infinity();
    for (int T = 1; T <= 1024; T *= 2) {
      const double err =
          max_action_error(policy, NeuronKind::if_neuron(), T, theta, obs_set);
      CHECK(err <= prev + 1e-12);
      prev = err;
    }
    CHECK(prev < 1e-2);
  }

  SUBCASE("signed, multi-threshold and differential kinds converge too") {
    for (NeuronKind kind :
         {NeuronKind::snm(), NeuronKind::mt(4),
          NeuronKind::dc(NeuronKind::Base::MT, 4),
          NeuronKind::dc(NeuronKind::Base::IF)}) {
      CHECK(max_action_error(policy, kind, 1024, theta, obs_set) < 1e-2);
    }
  }

  SUBCASE("signed spikes beat plain IF at T=16 on the median seed") {
    std::vector<double> diffs;
    for (int seed = 0; seed < 7; ++seed) {
      MlpPolicy p = init_policy({3, 16, 1}, 1.0, 9000 + seed);
      std::vector<Eigen::VectorXd> obs =
          random_obs_set(100, 3, 5000 + seed);
      std::vector<Eigen::VectorXd> th = calibrate_thresholds(p, obs);
      const double err_if =
          max_action_error(p, NeuronKind::if_neuron(), 16, th, obs);
      const double err_snm =
          max_action_error(p, NeuronKind::snm(), 16, th, obs);
      diffs.push_back(err_if - err_snm);
    }
    std::sort(diffs.begin(), diffs.end());
    CHECK(diffs[diffs.size() / 2] >= 0.0);
  }
}

TEST_CASE("cumulative outputs stay non-negative for SNM and MT") {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (NeuronKind kind : {NeuronKind::snm(), NeuronKind::mt(4),
                          NeuronKind::dc(NeuronKind::Base::MT, 4)}) {
    MlpPolicy policy = init_policy({3, 12, 1}, 1.0, 55);
    std::vector<Eigen::VectorXd> obs_set = random_obs_set(50, 3, 909);
    std::vector<Eigen::VectorXd> theta = calibrate_thresholds(policy, obs_set);
    SpikingNetwork net = convert(policy, kind, 16, theta);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd obs(3);
      for (int i = 0; i < 3; ++i) obs[i] = dist(rng);
      net.infer(obs);
      CHECK((net.hidden(0).c.array() >= 0.0).all());
    }
  }
}

TEST_CASE("inference is deterministic") {
  MlpPolicy policy = init_policy({2, 8, 1}, 1.0, 77);
  std::vector<Eigen::VectorXd> obs_set = random_obs_set(20, 2, 3);
  std::vector<Eigen::VectorXd> theta = calibrate_thresholds(policy, obs_set);
  for (NeuronKind kind :
       {NeuronKind::if_neuron(), NeuronKind::snm(), NeuronKind::mt(4),
        NeuronKind::dc(NeuronKind::Base::MT, 4)}) {
    SpikingNetwork a = convert(policy, kind, 12, theta);
    SpikingNetwork b = convert(policy, kind, 12, theta);
    for (const Eigen::VectorXd& obs : obs_set) {
      CHECK(a.infer(obs) == b.infer(obs));
    }
  }
}

TEST_CASE("non-finite membranes raise a numeric fault") {
  SpikingLayer layer = single_channel_layer(1.0);
  CHECK_THROWS_AS(
      if_step(layer, vec1(std::numeric_limits<double>::infinity())),
      NumericFault);
}
