#include "snnloop/crpi.hpp"

#include <string>

#include "snnloop/errors.hpp"

namespace snnloop {

CrpiState::CrpiState(double a, bool symmetric)
    : alpha(a), symmetric_clip(symmetric) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must be in [0, 1] (got " +
                          std::to_string(a) + ")");
  }
}

void begin_decision_step(SpikingNetwork& net, CrpiState& state) {
  if (state.step_index == 0) {
    net.begin_decision_step();
    return;
  }
  if (static_cast<int>(state.v0_prev.size()) != net.num_hidden()) {
    throw ProtocolError("carry state does not match this network");
  }
  std::vector<Eigen::VectorXd> v0(static_cast<std::size_t>(net.num_hidden()));
  for (int l = 0; l < net.num_hidden(); ++l) {
    const std::size_t li = static_cast<std::size_t>(l);
    const Eigen::ArrayXd theta = net.hidden(l).theta.array();
    Eigen::ArrayXd dv =
        (state.vT_prev[li] - state.v0_prev[li]).array();
    dv = dv.max(-state.sumx_prev[li].array());
    const double lo_scale = state.symmetric_clip ? -1.0 : 0.0;
    v0[li] = (0.5 * theta + state.alpha * dv)
                 .max(lo_scale * theta)
                 .min(theta)
                 .matrix();
  }
  net.begin_decision_step(v0);
}

void end_decision_step(const SpikingNetwork& net, CrpiState& state) {
  if (net.inference_count() == state.captured_inference) {
    throw ProtocolError(
        "end_decision_step called without an inference since the last "
        "capture");
  }
  state.v0_prev.clear();
  state.vT_prev.clear();
  state.sumx_prev.clear();
  for (int l = 0; l < net.num_hidden(); ++l) {
    state.v0_prev.push_back(net.hidden(l).v_start);
    state.vT_prev.push_back(net.hidden(l).v);
    state.sumx_prev.push_back(net.hidden(l).sum_x);
  }
  state.captured_inference = net.inference_count();
  ++state.step_index;
}

Eigen::VectorXd residual_error(const Eigen::VectorXd& v0,
                               const Eigen::VectorXd& vT, int T) {
  if (T < 1) throw ValidationError("T must be >= 1");
  return (vT - v0) / static_cast<double>(T);
}

Eigen::VectorXd infer(SpikingNetwork& net, const Eigen::VectorXd& obs,
                      CrpiState* crpi) {
  if (crpi == nullptr) {
    return net.infer(obs);
  }
  begin_decision_step(net, *crpi);
  Eigen::VectorXd action = net.infer(obs);
  end_decision_step(net, *crpi);
  return action;
}

}  // namespace snnloop
