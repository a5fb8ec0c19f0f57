#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snnloop/env.hpp"
#include "snnloop/mlp.hpp"
#include "snnloop/policy.hpp"
#include "snnloop/rollout.hpp"
#include "snnloop/spiking.hpp"

namespace snnloop {

struct MeanStd {
  double mean = 0.0;
  double half_std = 0.0;  // half a sample standard deviation
};

MeanStd mean_half_std(const std::vector<double>& values);

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(const std::vector<double>& x,
                    const std::vector<double>& y);

// How the spiking arm of a comparison is run.
struct SnnOptions {
  std::optional<double> alpha;  // engaged residual carry, if any
  bool symmetric_clip = false;
};

// ---------------------------------------------------------------------------
// Reward decomposition: isolates the action-substitution effect from the
// state-distribution shift by evaluating each policy's one-step rewards
// along the other policy's visited states, on matched seeds.
struct DecompositionReport {
  MeanStd r_ann;            // ANN policy on ANN-induced states
  MeanStd r_snn;            // SNN policy on SNN-induced states
  MeanStd r_snn_given_ann;  // SNN actions scored along ANN-visited states
  MeanStd r_ann_given_snn;  // ANN actions scored along SNN-visited states
  int episodes = 0;
};

DecompositionReport reward_decomposition(const Environment& env,
                                         const MlpPolicy& ann,
                                         const SpikingNetwork& snn,
                                         const SnnOptions& options,
                                         int episodes,
                                         std::uint64_t master_seed,
                                         int jobs = 1);

// ---------------------------------------------------------------------------
// Cross-step action-error cosines along SNN-driven trajectories with
// one-step counterfactual branches:
//   da_k            = a_k^SNN - a_k^ANN at the shared state s_k
//   ann_correction  = cos(da_k, a_cf - a_{k+1}^ANN)
//   snn_consistency = cos(da_k, a_{k+1}^SNN - a_cf)
//   snn_drift       = cos(da_k, a_{k+1}^SNN - a_{k+1}^ANN)
// where a_cf applies the ANN policy to the SNN-induced next state. Pairs
// with |da_k| < 1e-9 are skipped; means pool steps and episodes.
struct CorrelationReport {
  double ann_correction = 0.0;
  double snn_consistency = 0.0;
  double snn_drift = 0.0;
  std::int64_t n_pairs = 0;
};

CorrelationReport cross_step_correlations(const Environment& env,
                                          const MlpPolicy& ann,
                                          const SpikingNetwork& snn,
                                          const SnnOptions& options,
                                          int episodes,
                                          std::uint64_t master_seed,
                                          int jobs = 1);

// ---------------------------------------------------------------------------
// Residual-potential decorrelation versus alpha. For each alpha, the mean
// cosine between consecutive residual errors eps_k = (v_k[T]-v_k[0])/T
// (per layer, averaged across layers) plus the action-level metrics above,
// all on matched seeds.
struct ResidualCorrelationRow {
  double alpha;
  double residual_cosine;
  double snn_consistency;
  double snn_drift;
};

std::vector<ResidualCorrelationRow> residual_correlation_sweep(
    const Environment& env, const MlpPolicy& ann, const SpikingNetwork& snn,
    const std::vector<double>& alphas, bool symmetric_clip, int episodes,
    std::uint64_t master_seed, int jobs = 1);

// Per-decision-step residual record of a single episode (trace dumps).
struct ResidualTraceRow {
  int k;
  int layer;
  double mean_eps;
  double cos_prev;  // NaN at k = 0
};

std::vector<ResidualTraceRow> residual_trace(const Environment& env,
                                             const SpikingNetwork& snn,
                                             const SnnOptions& options,
                                             int horizon, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Return versus alpha. Ratios are relative to the matched-seed ANN returns;
// with non-positive returns the plain quotient is meaningless, so the
// regret form (r - r_worst) / (r_ann - r_worst) is used, with r_worst the
// smallest arm mean in the sweep. `regret_form` records which convention
// the table uses.
struct AlphaPerformanceRow {
  double alpha;
  double mean_return;
  double half_std;
  double ratio;
};

struct AlphaPerformanceTable {
  MeanStd ann;
  std::vector<AlphaPerformanceRow> rows;
  bool regret_form = false;
  double r_worst = 0.0;
};

AlphaPerformanceTable alpha_performance_sweep(
    const Environment& env, const MlpPolicy& ann, const SpikingNetwork& snn,
    const std::vector<double>& alphas, bool symmetric_clip, int episodes,
    std::uint64_t master_seed, int jobs = 1);

// ---------------------------------------------------------------------------
struct PerStepReward {
  int k;
  double mean_reward;
  double half_std;
};

// Pointwise mean/half-std over episodes; `window` > 1 applies a centered
// moving average (presentation only, default off).
std::vector<PerStepReward> per_step_rewards(
    const std::vector<Trajectory>& trajectories, int window = 1);

// ---------------------------------------------------------------------------
// Projection of stacked trajectory states onto the first principal
// component, computed by power iteration (tol 1e-10, <= 1e4 iterations,
// sign fixed so the component's first nonzero entry is positive).
struct PcaResult {
  Eigen::VectorXd component;
  std::vector<std::vector<double>> projections;  // one series per trajectory
};

PcaResult pca_project(const std::vector<Trajectory>& trajectories);

// ---------------------------------------------------------------------------
struct EnergyReport {
  std::int64_t flops = 0;
  std::int64_t sops = 0;
  double energy_joules = 0.0;
};

inline constexpr double kJoulesPerFlop = 12.5e-12;
inline constexpr double kJoulesPerSop = 77e-15;

EnergyReport energy_estimate(std::int64_t flops, std::int64_t sops);

// ---------------------------------------------------------------------------
// Matched-seed evaluation of one policy arm.
struct EvalArm {
  std::string tag;
  std::vector<Trajectory> trajectories;
  MeanStd returns;
  std::uint64_t sops = 0;        // spiking arms only
  std::uint64_t inferences = 0;  // spiking arms only
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

EvalArm evaluate(const Environment& env, const PolicyFactory& make_policy,
                 int episodes, std::uint64_t master_seed, int jobs,
                 const std::string& tag);

}  // namespace snnloop
