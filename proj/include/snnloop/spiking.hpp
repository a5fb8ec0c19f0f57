#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "snnloop/mlp.hpp"
#include "snnloop/neuron.hpp"

namespace snnloop {

// One hidden layer of a converted network: the source weights plus the
// mutable neuron state for the current decision step.
//
// Membrane convention follows the usual rate-coding formulation: m is the
// pre-reset potential (v + input current), v the post-reset potential after
// subtracting the fired threshold.
struct SpikingLayer {
  Eigen::MatrixXd weights;        // out x in; bias zeroed under diff. coding
  Eigen::VectorXd bias;
  Eigen::VectorXd theta;          // per-channel firing threshold, > 0
  Eigen::VectorXd memory_bias;    // m_r start value (folded bias), DC only

  // State within the current decision step.
  Eigen::VectorXd v;        // post-reset membrane potential
  Eigen::VectorXd c;        // cumulative output (SNM/MT)
  Eigen::VectorXd m_r;      // differential-coding memory
  Eigen::VectorXd sum_x;    // sum of outputs x[t] so far this decision step
  Eigen::VectorXd v_start;  // v at the start of this decision step

  std::uint64_t spike_events = 0;  // firing channels, any polarity/threshold

  int in() const { return static_cast<int>(weights.cols()); }
  int out() const { return static_cast<int>(weights.rows()); }
};

// Single-step neuron updates. Each consumes the layer's input current (or,
// for dc_step, the raw weighted drive), mutates membrane state, bumps the
// spike-event counter, and returns the postsynaptic output x[t].

// m = v + I; spike where m >= theta; x = theta on spiking channels;
// v <- m - x.
Eigen::VectorXd if_step(SpikingLayer& layer, const Eigen::VectorXd& current);

// Signed spikes: +theta where m >= theta, -theta where m <= -theta and the
// cumulative output can afford it (c >= theta). The literal variant fires
// the negative spike for any sub-threshold membrane with c >= -theta, which
// lets c go negative; it is kept only as a diagnostic.
Eigen::VectorXd snm_step(SpikingLayer& layer, const Eigen::VectorXd& current,
                         bool literal_rule = false);

// Multi-threshold firing. Positive thresholds are theta/2^(i-1), i=1..n;
// a channel fires the one whose half-open interval
// [0.75*lambda, 1.5*lambda) contains m, saturating at lambda_1 = theta for
// membranes above the top interval. Negative spikes mirror the rule on
// |m| but the magnitude is additionally capped by the largest power-of-two
// multiple of theta not exceeding c, so c never goes negative. Membranes
// below the smallest interval emit nothing that step.
Eigen::VectorXd mt_step(SpikingLayer& layer, const Eigen::VectorXd& current,
                        int n);

// Differential-coding wrapper: I = m_r + drive feeds the inner neuron, and
// m_r <- m_r + drive/t - x/t with t the 1-based step index within the
// decision step. `drive` excludes the bias, which lives in memory_bias.
Eigen::VectorXd dc_step(SpikingLayer& layer, const Eigen::VectorXd& drive,
                        int t, const NeuronKind& kind);

// A converted actor: spiking hidden layers plus a non-spiking output layer
// that accumulates its input current over the T simulation steps of one
// decision step. The action is action_scale * tanh(accumulated / T).
//
// Mutable membrane state makes an instance single-threaded; copies are
// independent and cheap, so parallel rollouts use one copy per episode.
class SpikingNetwork {
 public:
  SpikingNetwork(std::vector<SpikingLayer> hidden, DenseLayer output,
                 NeuronKind kind, int T, double action_scale);

  int T() const { return T_; }
  double action_scale() const { return action_scale_; }
  const NeuronKind& kind() const { return kind_; }
  int obs_dim() const { return hidden_.front().in(); }
  int act_dim() const { return output_.out(); }
  int num_hidden() const { return static_cast<int>(hidden_.size()); }
  const SpikingLayer& hidden(int i) const {
    return hidden_[static_cast<std::size_t>(i)];
  }
  const DenseLayer& output_layer() const { return output_; }

  // Fresh decision-step state: v = theta/2, c = 0, m_r = folded bias,
  // sum_x = 0. Event counters are left alone.
  void begin_decision_step();

  // Decision-step state with externally chosen initial membranes (the
  // cross-step residual path). Auxiliary state resets as above.
  void begin_decision_step(const std::vector<Eigen::VectorXd>& v0);

  // Runs T simulation steps with `obs` injected as a constant current into
  // layer 1 and returns the action. Starts a fresh decision step unless a
  // begin_decision_step() call is pending.
  Eigen::VectorXd infer(const Eigen::VectorXd& obs);

  // Counters for the energy model; they accumulate across decision steps
  // and episodes until reset_counters().
  std::uint64_t inference_count() const { return inference_count_; }
  std::uint64_t sim_steps() const { return sim_steps_; }
  std::uint64_t input_injection_events() const {
    return sim_steps_ * static_cast<std::uint64_t>(obs_dim());
  }
  void reset_counters();

  int fan_out(int hidden_index) const;

 private:
  std::vector<SpikingLayer> hidden_;
  DenseLayer output_;
  NeuronKind kind_;
  int T_;
  double action_scale_;

  bool init_pending_ = false;
  std::uint64_t inference_count_ = 0;
  std::uint64_t sim_steps_ = 0;
};

// Per-channel firing thresholds: the max post-ReLU activation of each
// hidden channel over the calibration states, floored at `floor` so dead
// channels keep a valid positive threshold.
std::vector<Eigen::VectorXd> calibrate_thresholds(
    const MlpPolicy& policy, const std::vector<Eigen::VectorXd>& states,
    double floor = 1e-6);

// Copies weights and biases verbatim into a spiking network. Under
// differential coding, linear biases move into each layer's initial memory
// m_r[0]; the non-spiking output layer keeps its bias (adding it every step
// and averaging is identical to folding).
SpikingNetwork convert(const MlpPolicy& policy, const NeuronKind& kind, int T,
                       const std::vector<Eigen::VectorXd>& theta);

// Synaptic operations since the last counter reset: every spike event costs
// the emitting neuron's fan-out, plus one op per input channel per
// simulation step for the analog observation injection.
std::uint64_t count_sops(const SpikingNetwork& net);

}  // namespace snnloop
