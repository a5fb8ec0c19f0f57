#include "snnloop/env.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "snnloop/errors.hpp"
#include "snnloop/lqr.hpp"
#include "snnloop/rng.hpp"

namespace snnloop {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double wrap_angle(double phi) {
  double w = std::fmod(phi + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

void Environment::set_horizon(int horizon) {
  if (horizon < 1) {
    throw ValidationError("horizon must be >= 1 (got " +
                          std::to_string(horizon) + ")");
  }
  spec_.horizon = horizon;
}

void Environment::set_init_bounds(const Eigen::Vector2d& lo,
                                  const Eigen::Vector2d& hi) {
  if ((lo.array() > hi.array()).any()) {
    throw ValidationError("init bounds: lo must not exceed hi");
  }
  spec_.init_lo = lo;
  spec_.init_hi = hi;
}

EnvState Environment::reset(std::uint64_t seed) const {
  return sample_initial(seed);
}

EnvState Environment::sample_initial(std::uint64_t seed) const {
  std::mt19937_64 rng = make_rng(seed);
  EnvState s;
  for (int i = 0; i < 2; ++i) {
    std::uniform_real_distribution<double> dist(spec_.init_lo[i],
                                                spec_.init_hi[i]);
    s.x[i] = (spec_.init_lo[i] == spec_.init_hi[i]) ? spec_.init_lo[i]
                                                    : dist(rng);
  }
  return s;
}

double Environment::clip_action(const Eigen::VectorXd& action) const {
  if (action.size() != spec_.act_dim) {
    throw ValidationError("action has dimension " +
                          std::to_string(action.size()) + ", expected " +
                          std::to_string(spec_.act_dim));
  }
  if (!action.allFinite()) {
    throw NumericFault("non-finite action");
  }
  return std::clamp(action[0], -spec_.action_scale, spec_.action_scale);
}

DoubleIntegratorEnv::DoubleIntegratorEnv()
    : Environment(EnvSpec{"double_integrator", 2, 1, 1.0, 0.05, 200,
                          Eigen::Vector2d(-1.0, -0.5),
                          Eigen::Vector2d(1.0, 0.5)}) {
  Eigen::Matrix2d A;
  A << 1.0, spec_.dt, 0.0, 1.0;
  Eigen::Vector2d B(0.0, spec_.dt);
  Eigen::Matrix2d Q = Eigen::Vector2d(1.0, 0.1).asDiagonal();
  Eigen::Matrix<double, 1, 1> R;
  R << 0.01;
  gain_ = lqr_solve(A, B, Q, R).K;
}

std::pair<EnvState, double> DoubleIntegratorEnv::step(
    const EnvState& state, const Eigen::VectorXd& action) const {
  const double a = clip_action(action);
  const double p = state.x[0];
  const double v = state.x[1];
  EnvState next;
  next.x[0] = p + spec_.dt * v;
  next.x[1] = v + spec_.dt * a;
  next.step = state.step + 1;
  const double reward = -(p * p + 0.1 * v * v + 0.01 * a * a);
  return {next, reward};
}

Eigen::VectorXd DoubleIntegratorEnv::observe(const EnvState& state) const {
  return state.x;
}

Eigen::VectorXd DoubleIntegratorEnv::expert_action(
    const EnvState& state) const {
  const double u = -(gain_ * state.x)(0);
  Eigen::VectorXd a(1);
  a[0] = std::clamp(u, -spec_.action_scale, spec_.action_scale);
  return a;
}

PendulumEnv::PendulumEnv()
    : Environment(EnvSpec{"pendulum", 3, 1, 2.0, 0.05, 200,
                          Eigen::Vector2d(-kPi, -1.0),
                          Eigen::Vector2d(kPi, 1.0)}) {}

EnvState PendulumEnv::sample_initial(std::uint64_t seed) const {
  EnvState s = Environment::sample_initial(seed);
  // uniform_real samples [lo, hi); negating puts the angle in (lo, hi].
  s.x[0] = -s.x[0];
  return s;
}

std::pair<EnvState, double> PendulumEnv::step(
    const EnvState& state, const Eigen::VectorXd& action) const {
  const double a = clip_action(action);
  const double phi = state.x[0];
  const double omega = state.x[1];
  const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(phi) +
                       3.0 / (kMass * kLength * kLength) * a;
  EnvState next;
  next.x[1] = std::clamp(omega + spec_.dt * accel, -kMaxSpeed, kMaxSpeed);
  next.x[0] = phi + spec_.dt * next.x[1];
  next.step = state.step + 1;
  const double w = wrap_angle(phi);
  const double reward = -(w * w + 0.1 * omega * omega + 0.001 * a * a);
  return {next, reward};
}

Eigen::VectorXd PendulumEnv::observe(const EnvState& state) const {
  Eigen::VectorXd obs(3);
  obs << std::cos(state.x[0]), std::sin(state.x[0]), state.x[1];
  return obs;
}

Eigen::VectorXd PendulumEnv::expert_action(const EnvState& state) const {
  const double phi = state.x[0];
  const double omega = state.x[1];
  const double w = wrap_angle(phi);
  const double inertia = kMass * kLength * kLength / 3.0;  // rod about pivot
  double u;
  if (std::abs(w) >= kCatchRadius) {
    // Pump the rod energy toward the upright rest energy; dE/dt = u*omega,
    // so this gain keeps the sign of the energy gap.
    const double energy = 0.5 * inertia * omega * omega +
                          kMass * kGravity * (kLength / 2.0) * std::cos(phi);
    const double upright = kMass * kGravity * (kLength / 2.0);
    u = kEnergyGain * omega * (upright - energy);
  } else {
    u = -kPdAngleGain * w - kPdRateGain * omega;
  }
  Eigen::VectorXd a(1);
  a[0] = std::clamp(u, -spec_.action_scale, spec_.action_scale);
  return a;
}

std::unique_ptr<Environment> make_env(const std::string& name) {
  if (name == "double_integrator") {
    return std::make_unique<DoubleIntegratorEnv>();
  }
  if (name == "pendulum") {
    return std::make_unique<PendulumEnv>();
  }
  throw ValidationError("unknown environment '" + name +
                        "' (expected double_integrator|pendulum)");
}

}  // namespace snnloop
