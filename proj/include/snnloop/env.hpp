#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

namespace snnloop {

// Value-semantic environment state; snapshot/branching is a plain copy.
struct EnvState {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  int step = 0;
};

struct EnvSpec {
  std::string name;
  int obs_dim;
  int act_dim;
  double action_scale;
  double dt;
  int horizon;
  Eigen::Vector2d init_lo;
  Eigen::Vector2d init_hi;
};

// Deterministic continuous-control MDPs. A step is a pure function of
// (state, action): no hidden state, so counterfactual branches are exact.
// All methods are const and thread-safe.
class Environment {
 public:
  virtual ~Environment() = default;

  const EnvSpec& spec() const { return spec_; }
  void set_horizon(int horizon);
  void set_init_bounds(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi);

  EnvState reset(std::uint64_t seed) const;

  // Applies the action (clipped to +-action_scale) and returns the next
  // state and the reward r(state, action).
  virtual std::pair<EnvState, double> step(
      const EnvState& state, const Eigen::VectorXd& action) const = 0;

  virtual Eigen::VectorXd observe(const EnvState& state) const = 0;

  // Analytic near-optimal controller used as the imitation target.
  virtual Eigen::VectorXd expert_action(const EnvState& state) const = 0;

 protected:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}
  virtual EnvState sample_initial(std::uint64_t seed) const;
  double clip_action(const Eigen::VectorXd& action) const;

  EnvSpec spec_;
};

// p' = p + dt v, v' = v + dt a, r = -(p^2 + 0.1 v^2 + 0.01 a^2).
// Expert: u = clip(-K x) with K from the discrete LQR of the exact
// discretized dynamics.
class DoubleIntegratorEnv final : public Environment {
 public:
  DoubleIntegratorEnv();
  std::pair<EnvState, double> step(const EnvState& state,
                                   const Eigen::VectorXd& action) const override;
  Eigen::VectorXd observe(const EnvState& state) const override;
  Eigen::VectorXd expert_action(const EnvState& state) const override;
  const Eigen::RowVector2d& lqr_gain() const { return gain_; }

 private:
  Eigen::RowVector2d gain_;
};

// Torque-limited pendulum, angle measured from upright, semi-implicit
// Euler. Observation is (cos phi, sin phi, omega). Expert: energy-shaping
// swing-up with a PD catch near the top.
class PendulumEnv final : public Environment {
 public:
  PendulumEnv();
  std::pair<EnvState, double> step(const EnvState& state,
                                   const Eigen::VectorXd& action) const override;
  Eigen::VectorXd observe(const EnvState& state) const override;
  Eigen::VectorXd expert_action(const EnvState& state) const override;

 private:
  EnvState sample_initial(std::uint64_t seed) const override;

  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMaxSpeed = 8.0;
  // Swing-up constants, tuned once against the rollout checks and frozen.
  static constexpr double kEnergyGain = 2.0;
  static constexpr double kPdAngleGain = 12.0;
  static constexpr double kPdRateGain = 4.0;
  static constexpr double kCatchRadius = 0.3;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double phi);

std::unique_ptr<Environment> make_env(const std::string& name);

}  // namespace snnloop
