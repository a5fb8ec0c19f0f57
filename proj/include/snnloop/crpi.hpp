#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "snnloop/spiking.hpp"

namespace snnloop {

// Cross-step residual potential initialization.
//
// Instead of re-initializing every membrane at theta/2 for each decision
// step, the residual potential left over by the previous step,
// dv = v_{k-1}[T] - v_{k-1}[0], is carried forward:
//
//   dv   <- max(dv, -sum_t x_{k-1}[t])          (keep the decoded rate >= 0)
//   v[0] <- clip(theta/2 + alpha * dv, 0, theta)
//
// alpha = 0 reproduces plain per-step initialization bit for bit. Auxiliary
// state (cumulative output c, differential memory m_r) always restarts
// fresh; only the membrane potential carries over.
struct CrpiState {
  double alpha = 0.0;
  // Clip to [-theta, theta] instead of [0, theta]; ablation switch for the
  // signed neuron kinds, off by default.
  bool symmetric_clip = false;

  int step_index = 0;  // decision steps completed (k)
  std::vector<Eigen::VectorXd> v0_prev;    // v_{k-1}[0]
  std::vector<Eigen::VectorXd> vT_prev;    // v_{k-1}[T]
  std::vector<Eigen::VectorXd> sumx_prev;  // sum_t x_{k-1}[t]

  std::uint64_t captured_inference = 0;  // protocol guard

  explicit CrpiState(double a = 0.0, bool symmetric = false);
};

// Applies the initialization above to the network (k = 0 falls back to
// theta/2 everywhere).
void begin_decision_step(SpikingNetwork& net, CrpiState& state);

// Records v[0], v[T] and sum_x from the just-finished inference and
// advances k. Throws ProtocolError if no inference happened since the last
// capture.
void end_decision_step(const SpikingNetwork& net, CrpiState& state);

// Residual membrane potential error of one decision step.
Eigen::VectorXd residual_error(const Eigen::VectorXd& v0,
                               const Eigen::VectorXd& vT, int T);

// One decision step of a spiking policy: wraps net.infer() in the
// begin/end bookkeeping when a carry state is supplied.
Eigen::VectorXd infer(SpikingNetwork& net, const Eigen::VectorXd& obs,
                      CrpiState* crpi = nullptr);

}  // namespace snnloop
