#include "snnloop/spiking.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "snnloop/errors.hpp"

namespace snnloop {
namespace {

void check_membrane(const Eigen::VectorXd& m) {
  if (!m.allFinite()) {
    throw NumericFault("membrane potential became non-finite");
  }
}

// Classifies a positive value into the half-open band
// [0.75*2^e, 1.5*2^e); the bands tile (0, inf) disjointly. Comparisons are
// against exactly representable bounds, so band edges behave consistently
// with the interval-scan oracle used in tests.
int band_exponent(double a) {
  const int e0 = std::ilogb(a);
  return (a < std::scalbn(1.5, e0)) ? e0 : e0 + 1;
}

}  // namespace

Eigen::VectorXd if_step(SpikingLayer& layer, const Eigen::VectorXd& current) {
  Eigen::VectorXd m = layer.v + current;
  check_membrane(m);
  Eigen::ArrayXd fired =
      (m.array() >= layer.theta.array()).cast<double>();
  Eigen::VectorXd x = (layer.theta.array() * fired).matrix();
  layer.v = m - x;
  layer.sum_x += x;
  layer.spike_events += static_cast<std::uint64_t>(fired.sum());
  return x;
}

Eigen::VectorXd snm_step(SpikingLayer& layer, const Eigen::VectorXd& current,
                         bool literal_rule) {
  Eigen::VectorXd m = layer.v + current;
  check_membrane(m);
  const Eigen::ArrayXd& theta = layer.theta.array();
  Eigen::ArrayXd pos = (m.array() >= theta).cast<double>();
  Eigen::ArrayXd neg;
  if (literal_rule) {
    // H(-m+theta) * H(c+theta) taken verbatim: fires for any sub-threshold
    // membrane and can drive c below zero.
    neg = ((m.array() <= theta) && (layer.c.array() >= -theta)).cast<double>();
  } else {
    neg = ((m.array() <= -theta) && (layer.c.array() >= theta)).cast<double>();
  }
  Eigen::VectorXd x = (theta * (pos - neg)).matrix();
  layer.v = m - x;
  layer.c += x;
  layer.sum_x += x;
  layer.spike_events +=
      static_cast<std::uint64_t>(((pos - neg) != 0.0).count());
  return x;
}

Eigen::VectorXd mt_step(SpikingLayer& layer, const Eigen::VectorXd& current,
                        int n) {
  Eigen::VectorXd m = layer.v + current;
  check_membrane(m);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m.size());
  std::uint64_t fired = 0;
  for (int j = 0; j < m.size(); ++j) {
    const double theta = layer.theta[j];
    const double u = m[j] / theta;
    if (u > 0.0) {
      // Positive threshold index i satisfies 1-i = band exponent of u.
      // Membranes above the top band fire the largest threshold; without
      // this saturation a charged-up neuron would never drain and the
      // rate decode could not converge.
      const int i = std::max(1, 1 - band_exponent(u));
      if (i <= n) {
        x[j] = std::scalbn(theta, 1 - i);
        ++fired;
      }
    } else if (u < 0.0 && layer.c[j] > 0.0) {
      // Negative magnitude index: nearest band of |u|, raised (magnitude
      // halved) until the spike is affordable by the cumulative output c.
      // Saturates at the largest threshold like the positive side.
      const double w = layer.c[j] / theta;
      int idx = std::max(0, std::max(-band_exponent(-u), -std::ilogb(w)));
      while (idx < n && std::scalbn(theta, -idx) > layer.c[j]) {
        ++idx;  // guards the 1-ulp rounding of c/theta at band edges
      }
      if (idx <= n - 1) {
        x[j] = -std::scalbn(theta, -idx);
        ++fired;
      }
    }
  }
  layer.v = m - x;
  layer.c += x;
  layer.sum_x += x;
  layer.spike_events += fired;
  return x;
}

Eigen::VectorXd dc_step(SpikingLayer& layer, const Eigen::VectorXd& drive,
                        int t, const NeuronKind& kind) {
  if (t < 1) {
    throw ValidationError("differential coding needs a 1-based step index");
  }
  Eigen::VectorXd current = layer.m_r + drive;
  Eigen::VectorXd x = (kind.base == NeuronKind::Base::IF)
                          ? if_step(layer, current)
                          : mt_step(layer, current, kind.thresholds);
  layer.m_r += (drive - x) / static_cast<double>(t);
  return x;
}

SpikingNetwork::SpikingNetwork(std::vector<SpikingLayer> hidden,
                               DenseLayer output, NeuronKind kind, int T,
                               double action_scale)
    : hidden_(std::move(hidden)),
      output_(std::move(output)),
      kind_(kind),
      T_(T),
      action_scale_(action_scale) {
  kind_.validate();
  if (T_ < 1) {
    throw ValidationError("simulation horizon T must be >= 1 (got " +
                          std::to_string(T_) + ")");
  }
  if (hidden_.empty()) {
    throw ValidationError("spiking network needs at least one hidden layer");
  }
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    const SpikingLayer& layer = hidden_[l];
    if (layer.theta.size() != layer.out() ||
        (layer.theta.array() <= 0.0).any()) {
      throw ValidationError("layer " + std::to_string(l) +
                            ": thresholds must be positive, one per channel");
    }
    const int next_in = (l + 1 < hidden_.size())
                            ? hidden_[l + 1].in()
                            : output_.in();
    if (layer.out() != next_in) {
      throw ValidationError("layer dimension chain broken at hidden layer " +
                            std::to_string(l));
    }
  }
  begin_decision_step();
  init_pending_ = false;
}

void SpikingNetwork::begin_decision_step() {
  for (SpikingLayer& layer : hidden_) {
    layer.v = 0.5 * layer.theta;
    layer.v_start = layer.v;
    layer.c = Eigen::VectorXd::Zero(layer.out());
    layer.m_r = kind_.differential ? layer.memory_bias
                                   : Eigen::VectorXd::Zero(layer.out());
    layer.sum_x = Eigen::VectorXd::Zero(layer.out());
  }
  init_pending_ = true;
}

void SpikingNetwork::begin_decision_step(
    const std::vector<Eigen::VectorXd>& v0) {
  if (static_cast<int>(v0.size()) != num_hidden()) {
    throw ValidationError("initial membranes: expected one vector per layer");
  }
  begin_decision_step();
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    if (v0[l].size() != hidden_[l].out() || !v0[l].allFinite()) {
      throw ValidationError("initial membranes: bad vector for layer " +
                            std::to_string(l));
    }
    hidden_[l].v = v0[l];
    hidden_[l].v_start = v0[l];
  }
  init_pending_ = true;
}

Eigen::VectorXd SpikingNetwork::infer(const Eigen::VectorXd& obs) {
  if (obs.size() != obs_dim()) {
    throw ValidationError("observation has dimension " +
                          std::to_string(obs.size()) + ", expected " +
                          std::to_string(obs_dim()));
  }
  if (!obs.allFinite()) {
    throw ValidationError("observation contains non-finite values");
  }
  if (!init_pending_) {
    begin_decision_step();
  }
  init_pending_ = false;

  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(act_dim());
  for (int t = 1; t <= T_; ++t) {
    Eigen::VectorXd cur = obs;
    for (SpikingLayer& layer : hidden_) {
      if (kind_.differential) {
        cur = dc_step(layer, layer.weights * cur, t, kind_);
      } else {
        Eigen::VectorXd current = layer.weights * cur + layer.bias;
        switch (kind_.base) {
          case NeuronKind::Base::IF:
            cur = if_step(layer, current);
            break;
          case NeuronKind::Base::SNM:
            cur = snm_step(layer, current, kind_.snm_literal);
            break;
          case NeuronKind::Base::MT:
            cur = mt_step(layer, current, kind_.thresholds);
            break;
        }
      }
    }
    accumulated += output_.weights * cur + output_.bias;
    ++sim_steps_;
  }
  ++inference_count_;
  Eigen::VectorXd mean_current = accumulated / static_cast<double>(T_);
  return action_scale_ * mean_current.array().tanh();
}

void SpikingNetwork::reset_counters() {
  for (SpikingLayer& layer : hidden_) layer.spike_events = 0;
  sim_steps_ = 0;
  inference_count_ = 0;
}

int SpikingNetwork::fan_out(int hidden_index) const {
  if (hidden_index + 1 < num_hidden()) {
    return hidden_[static_cast<std::size_t>(hidden_index) + 1].out();
  }
  return output_.out();
}

std::vector<Eigen::VectorXd> calibrate_thresholds(
    const MlpPolicy& policy, const std::vector<Eigen::VectorXd>& states,
    double floor) {
  if (states.empty()) {
    throw ValidationError("threshold calibration needs at least one state");
  }
  std::vector<Eigen::VectorXd> theta;
  for (int l = 0; l < policy.num_hidden(); ++l) {
    theta.push_back(Eigen::VectorXd::Zero(policy.layers()[l].out()));
  }
  for (const Eigen::VectorXd& s : states) {
    std::vector<Eigen::VectorXd> acts = policy.forward_with_activations(s);
    for (std::size_t l = 0; l < acts.size(); ++l) {
      theta[l] = theta[l].cwiseMax(acts[l]);
    }
  }
  for (Eigen::VectorXd& t : theta) {
    t = t.cwiseMax(floor);
  }
  return theta;
}

SpikingNetwork convert(const MlpPolicy& policy, const NeuronKind& kind, int T,
                       const std::vector<Eigen::VectorXd>& theta) {
  kind.validate();
  if (policy.num_hidden() < 1) {
    throw ValidationError("conversion needs at least one hidden layer");
  }
  if (static_cast<int>(theta.size()) != policy.num_hidden()) {
    throw ValidationError("expected " + std::to_string(policy.num_hidden()) +
                          " threshold vectors, got " +
                          std::to_string(theta.size()));
  }
  std::vector<SpikingLayer> hidden;
  for (int l = 0; l < policy.num_hidden(); ++l) {
    const DenseLayer& src = policy.layers()[static_cast<std::size_t>(l)];
    if (theta[static_cast<std::size_t>(l)].size() != src.out()) {
      throw ValidationError("threshold vector " + std::to_string(l) +
                            " does not match layer width");
    }
    SpikingLayer layer;
    layer.weights = src.weights;
    layer.theta = theta[static_cast<std::size_t>(l)];
    if (kind.differential) {
      layer.bias = Eigen::VectorXd::Zero(src.out());
      layer.memory_bias = src.bias;
    } else {
      layer.bias = src.bias;
      layer.memory_bias = Eigen::VectorXd::Zero(src.out());
    }
    hidden.push_back(std::move(layer));
  }
  return SpikingNetwork(std::move(hidden), policy.layers().back(), kind, T,
                        policy.action_scale());
}

std::uint64_t count_sops(const SpikingNetwork& net) {
  std::uint64_t sops = net.input_injection_events();
  for (int l = 0; l < net.num_hidden(); ++l) {
    sops += net.hidden(l).spike_events *
            static_cast<std::uint64_t>(net.fan_out(l));
  }
  return sops;
}

}  // namespace snnloop
