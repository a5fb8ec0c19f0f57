#include "snnloop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "snnloop/crpi.hpp"
#include "snnloop/errors.hpp"
#include "snnloop/rng.hpp"
#include "snnloop/util.hpp"

namespace snnloop {
namespace {

constexpr double kPairNormFloor = 1e-9;

std::uint64_t episode_seed(std::uint64_t master, int index) {
  return derive_seed(master, seed_stream::kEpisode,
                     static_cast<std::uint64_t>(index));
}

SnnPolicy make_snn_policy(const SpikingNetwork& net,
                          const SnnOptions& options) {
  return SnnPolicy(net, options.alpha, options.symmetric_clip);
}

// Residual errors of the decision step that just finished, one vector per
// hidden layer.
std::vector<Eigen::VectorXd> read_residuals(const SpikingNetwork& net) {
  std::vector<Eigen::VectorXd> eps;
  eps.reserve(static_cast<std::size_t>(net.num_hidden()));
  for (int l = 0; l < net.num_hidden(); ++l) {
    eps.push_back(
        residual_error(net.hidden(l).v_start, net.hidden(l).v, net.T()));
  }
  return eps;
}

// Mean over layers of cos(eps_prev, eps); layers whose residual vanishes on
// either side are skipped. Returns false if no layer contributes.
bool layer_mean_cosine(const std::vector<Eigen::VectorXd>& prev,
                       const std::vector<Eigen::VectorXd>& cur,
                       double* out) {
  double sum = 0.0;
  int used = 0;
  for (std::size_t l = 0; l < cur.size(); ++l) {
    const double np = prev[l].norm();
    const double nc = cur[l].norm();
    if (np < kPairNormFloor || nc < kPairNormFloor) continue;
    sum += prev[l].dot(cur[l]) / (np * nc);
    ++used;
  }
  if (used == 0) return false;
  *out = sum / used;
  return true;
}

struct EpisodeCosineStats {
  double corr = 0.0, cons = 0.0, drift = 0.0;
  std::int64_t pairs = 0;
  double res_cos = 0.0;
  std::int64_t res_pairs = 0;
};

// One SNN-driven episode with one-step ANN branches at every state; also
// tracks residual-error cosines between consecutive decision steps.
EpisodeCosineStats branched_episode(const Environment& env,
                                    const MlpPolicy& ann, SnnPolicy& snn,
                                    int horizon, std::uint64_t seed) {
  EpisodeCosineStats stats;
  snn.begin_episode();
  EnvState state = env.reset(seed);

  bool have_prev = false;
  Eigen::VectorXd prev_da, prev_cf, prev_ann_next;
  std::vector<Eigen::VectorXd> prev_eps;

  for (int k = 0; k < horizon; ++k) {
    const Eigen::VectorXd obs = env.observe(state);
    const Eigen::VectorXd a_snn = snn.act(state, obs);
    const Eigen::VectorXd a_ann = ann.forward(obs);
    std::vector<Eigen::VectorXd> eps = read_residuals(snn.network());

    if (have_prev) {
      // a_snn here is the SNN's action at the state reached by its own
      // previous action, completing last step's pair.
      const Eigen::VectorXd corr_vec = prev_cf - prev_ann_next;
      const Eigen::VectorXd cons_vec = a_snn - prev_cf;
      const Eigen::VectorXd drift_vec = a_snn - prev_ann_next;
      const double nd = prev_da.norm();
      if (nd >= kPairNormFloor && corr_vec.norm() > 0.0 &&
          cons_vec.norm() > 0.0 && drift_vec.norm() > 0.0) {
        stats.corr += prev_da.dot(corr_vec) / (nd * corr_vec.norm());
        stats.cons += prev_da.dot(cons_vec) / (nd * cons_vec.norm());
        stats.drift += prev_da.dot(drift_vec) / (nd * drift_vec.norm());
        ++stats.pairs;
      }
      double rc;
      if (layer_mean_cosine(prev_eps, eps, &rc)) {
        stats.res_cos += rc;
        ++stats.res_pairs;
      }
    }

    const EnvState s_ann_next = env.step(state, a_ann).first;
    const EnvState s_snn_next = env.step(state, a_snn).first;
    prev_da = a_snn - a_ann;
    prev_cf = ann.forward(env.observe(s_snn_next));
    prev_ann_next = ann.forward(env.observe(s_ann_next));
    prev_eps = std::move(eps);
    have_prev = true;
    state = s_snn_next;
  }
  return stats;
}

EpisodeCosineStats pooled_branched_stats(const Environment& env,
                                         const MlpPolicy& ann,
                                         const SpikingNetwork& snn,
                                         const SnnOptions& options,
                                         int episodes,
                                         std::uint64_t master_seed,
                                         int jobs) {
  if (episodes < 1) throw ValidationError("episodes must be >= 1");
  std::vector<EpisodeCosineStats> all = map_indexed<EpisodeCosineStats>(
      episodes, jobs, [&](int i) {
        SnnPolicy policy = make_snn_policy(snn, options);
        return branched_episode(env, ann, policy, env.spec().horizon,
                                episode_seed(master_seed, i));
      });
  EpisodeCosineStats total;
  for (const EpisodeCosineStats& s : all) {
    total.corr += s.corr;
    total.cons += s.cons;
    total.drift += s.drift;
    total.pairs += s.pairs;
    total.res_cos += s.res_cos;
    total.res_pairs += s.res_pairs;
  }
  return total;
}

}  // namespace

MeanStd mean_half_std(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("mean of an empty sample");
  const double n = static_cast<double>(values.size());
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, 0.5 * std::sqrt(ss / (n - 1.0))};
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateData("cosine of a zero vector");
  }
  return a.dot(b) / (na * nb);
}

double spearman_rho(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("spearman_rho needs two samples of equal size >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) +
                                static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DegenerateData("spearman_rho: constant ranks");
  }
  return sxy / std::sqrt(sxx * syy);
}

DecompositionReport reward_decomposition(const Environment& env,
                                         const MlpPolicy& ann,
                                         const SpikingNetwork& snn,
                                         const SnnOptions& options,
                                         int episodes,
                                         std::uint64_t master_seed,
                                         int jobs) {
  if (episodes < 1) throw ValidationError("episodes must be >= 1");
  if (ann.obs_dim() != snn.obs_dim() || ann.act_dim() != snn.act_dim()) {
    throw ValidationError("ANN and SNN policies disagree on dimensions");
  }
  struct Returns {
    double ann, snn, snn_given_ann, ann_given_snn;
  };
  const int horizon = env.spec().horizon;
  std::vector<Returns> rs = map_indexed<Returns>(episodes, jobs, [&](int i) {
    const std::uint64_t seed = episode_seed(master_seed, i);
    Returns r{0.0, 0.0, 0.0, 0.0};

    // ANN-driven arm: the SNN (with any carry state) processes the
    // ANN-visited states in sequence; its actions are scored one step at a
    // time without influencing the trajectory.
    {
      SnnPolicy snn_policy = make_snn_policy(snn, options);
      snn_policy.begin_episode();
      EnvState s = env.reset(seed);
      for (int k = 0; k < horizon; ++k) {
        const Eigen::VectorXd obs = env.observe(s);
        const Eigen::VectorXd a_ann = ann.forward(obs);
        const Eigen::VectorXd a_snn = snn_policy.act(s, obs);
        r.snn_given_ann += env.step(s, a_snn).second;
        auto [next, reward] = env.step(s, a_ann);
        r.ann += reward;
        s = next;
      }
    }
    // SNN-driven arm with the mirrored counterfactual.
    {
      SnnPolicy snn_policy = make_snn_policy(snn, options);
      snn_policy.begin_episode();
      EnvState s = env.reset(seed);
      for (int k = 0; k < horizon; ++k) {
        const Eigen::VectorXd obs = env.observe(s);
        const Eigen::VectorXd a_snn = snn_policy.act(s, obs);
        const Eigen::VectorXd a_ann = ann.forward(obs);
        r.ann_given_snn += env.step(s, a_ann).second;
        auto [next, reward] = env.step(s, a_snn);
        r.snn += reward;
        s = next;
      }
    }
    return r;
  });

  std::vector<double> v_ann, v_snn, v_sa, v_as;
  for (const Returns& r : rs) {
    v_ann.push_back(r.ann);
    v_snn.push_back(r.snn);
    v_sa.push_back(r.snn_given_ann);
    v_as.push_back(r.ann_given_snn);
  }
  return DecompositionReport{mean_half_std(v_ann), mean_half_std(v_snn),
                             mean_half_std(v_sa), mean_half_std(v_as),
                             episodes};
}

CorrelationReport cross_step_correlations(const Environment& env,
                                          const MlpPolicy& ann,
                                          const SpikingNetwork& snn,
                                          const SnnOptions& options,
                                          int episodes,
                                          std::uint64_t master_seed,
                                          int jobs) {
  const EpisodeCosineStats total = pooled_branched_stats(
      env, ann, snn, options, episodes, master_seed, jobs);
  if (total.pairs == 0) {
    throw DegenerateData(
        "no valid action-error pairs (all |da| below 1e-9)");
  }
  const double n = static_cast<double>(total.pairs);
  return CorrelationReport{total.corr / n, total.cons / n, total.drift / n,
                           total.pairs};
}

std::vector<ResidualCorrelationRow> residual_correlation_sweep(
    const Environment& env, const MlpPolicy& ann, const SpikingNetwork& snn,
    const std::vector<double>& alphas, bool symmetric_clip, int episodes,
    std::uint64_t master_seed, int jobs) {
  if (alphas.empty()) throw ValidationError("alpha grid is empty");
  std::vector<ResidualCorrelationRow> rows;
  for (double alpha : alphas) {
    SnnOptions options{alpha, symmetric_clip};
    const EpisodeCosineStats total = pooled_branched_stats(
        env, ann, snn, options, episodes, master_seed, jobs);
    if (total.pairs == 0 || total.res_pairs == 0) {
      throw DegenerateData("alpha " + std::to_string(alpha) +
                           ": no valid pairs to correlate");
    }
    rows.push_back(ResidualCorrelationRow{
        alpha, total.res_cos / static_cast<double>(total.res_pairs),
        total.cons / static_cast<double>(total.pairs),
        total.drift / static_cast<double>(total.pairs)});
  }
  return rows;
}

std::vector<ResidualTraceRow> residual_trace(const Environment& env,
                                             const SpikingNetwork& snn,
                                             const SnnOptions& options,
                                             int horizon, std::uint64_t seed) {
  SnnPolicy policy = make_snn_policy(snn, options);
  policy.begin_episode();
  EnvState state = env.reset(seed);
  std::vector<ResidualTraceRow> rows;
  std::vector<Eigen::VectorXd> prev_eps;
  for (int k = 0; k < horizon; ++k) {
    const Eigen::VectorXd obs = env.observe(state);
    const Eigen::VectorXd action = policy.act(state, obs);
    std::vector<Eigen::VectorXd> eps = read_residuals(policy.network());
    for (std::size_t l = 0; l < eps.size(); ++l) {
      double cos_prev = std::numeric_limits<double>::quiet_NaN();
      if (k > 0) {
        const double np = prev_eps[l].norm();
        const double nc = eps[l].norm();
        if (np >= kPairNormFloor && nc >= kPairNormFloor) {
          cos_prev = prev_eps[l].dot(eps[l]) / (np * nc);
        }
      }
      rows.push_back(ResidualTraceRow{k, static_cast<int>(l),
                                      eps[l].mean(), cos_prev});
    }
    prev_eps = std::move(eps);
    state = env.step(state, action).first;
  }
  return rows;
}

AlphaPerformanceTable alpha_performance_sweep(
    const Environment& env, const MlpPolicy& ann, const SpikingNetwork& snn,
    const std::vector<double>& alphas, bool symmetric_clip, int episodes,
    std::uint64_t master_seed, int jobs) {
  if (alphas.empty()) throw ValidationError("alpha grid is empty");
  if (episodes < 1) throw ValidationError("episodes must be >= 1");

  const int horizon = env.spec().horizon;
  std::vector<double> ann_returns = map_indexed<double>(
      episodes, jobs, [&](int i) {
        AnnPolicy policy(ann);
        return rollout(env, policy, horizon, episode_seed(master_seed, i))
            .total_return();
      });

  AlphaPerformanceTable table;
  table.ann = mean_half_std(ann_returns);

  std::vector<MeanStd> arm_stats;
  for (double alpha : alphas) {
    std::vector<double> returns = map_indexed<double>(
        episodes, jobs, [&](int i) {
          SnnPolicy policy(snn, alpha, symmetric_clip);
          return rollout(env, policy, horizon, episode_seed(master_seed, i))
              .total_return();
        });
    arm_stats.push_back(mean_half_std(returns));
  }

  double worst = arm_stats.front().mean;
  bool nonpositive = table.ann.mean <= 0.0;
  for (const MeanStd& s : arm_stats) {
    worst = std::min(worst, s.mean);
    nonpositive = nonpositive || s.mean <= 0.0;
  }
  table.regret_form = nonpositive;
  table.r_worst = worst;

  for (std::size_t i = 0; i < alphas.size(); ++i) {
    double ratio;
    if (table.regret_form) {
      const double denom = table.ann.mean - worst;
      ratio = (denom != 0.0)
                  ? (arm_stats[i].mean - worst) / denom
                  : std::numeric_limits<double>::quiet_NaN();
    } else {
      ratio = arm_stats[i].mean / table.ann.mean;
    }
    table.rows.push_back(AlphaPerformanceRow{
        alphas[i], arm_stats[i].mean, arm_stats[i].half_std, ratio});
  }
  return table;
}

std::vector<PerStepReward> per_step_rewards(
    const std::vector<Trajectory>& trajectories, int window) {
  if (trajectories.empty()) {
    throw ValidationError("per_step_rewards needs at least one trajectory");
  }
  if (window < 1) throw ValidationError("smoothing window must be >= 1");
  const int length = trajectories.front().length();
  for (const Trajectory& t : trajectories) {
    if (t.length() != length) {
      throw ValidationError("trajectories have different lengths");
    }
  }
  std::vector<PerStepReward> series;
  series.reserve(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) {
    std::vector<double> rs;
    rs.reserve(trajectories.size());
    for (const Trajectory& t : trajectories) {
      rs.push_back(t.rewards[static_cast<std::size_t>(k)]);
    }
    const MeanStd ms = mean_half_std(rs);
    series.push_back(PerStepReward{k, ms.mean, ms.half_std});
  }
  if (window > 1) {
    std::vector<PerStepReward> smoothed = series;
    const int half = window / 2;
    for (int k = 0; k < length; ++k) {
      const int lo = std::max(0, k - half);
      const int hi = std::min(length - 1, k + half);
      double sm = 0.0, ss = 0.0;
      for (int j = lo; j <= hi; ++j) {
        sm += series[static_cast<std::size_t>(j)].mean_reward;
        ss += series[static_cast<std::size_t>(j)].half_std;
      }
      const double n = static_cast<double>(hi - lo + 1);
      smoothed[static_cast<std::size_t>(k)].mean_reward = sm / n;
      smoothed[static_cast<std::size_t>(k)].half_std = ss / n;
    }
    return smoothed;
  }
  return series;
}

PcaResult pca_project(const std::vector<Trajectory>& trajectories) {
  std::size_t total = 0;
  for (const Trajectory& t : trajectories) total += t.states.size();
  if (trajectories.empty() || total < 2) {
    throw ValidationError("pca_project needs at least two states");
  }
  const Eigen::Index dim = trajectories.front().states.front().x.size();

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const Trajectory& t : trajectories) {
    for (const EnvState& s : t.states) mean += s.x;
  }
  mean /= static_cast<double>(total);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const Trajectory& t : trajectories) {
    for (const EnvState& s : t.states) {
      const Eigen::VectorXd d = s.x - mean;
      cov += d * d.transpose();
    }
  }
  cov /= static_cast<double>(total);
  if (cov.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateData("pca_project: zero covariance");
  }

  // Power iteration on the (PSD) covariance.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(dim).normalized();
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 10000;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd w = cov * v;
    const double norm = w.norm();
    if (norm == 0.0) {
      // Start vector lies in the null space; fall back to a basis vector
      // with a nonzero image.
      bool found = false;
      for (Eigen::Index i = 0; i < dim && !found; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(dim, i);
        if ((cov * e).norm() > 0.0) {
          v = e;
          found = true;
        }
      }
      if (!found) throw DegenerateData("pca_project: zero covariance");
      continue;
    }
    w /= norm;
    if (w.dot(v) < 0.0) w = -w;
    const double change = (w - v).cwiseAbs().maxCoeff();
    v = w;
    if (change < kTol) break;
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }

  PcaResult result;
  result.component = v;
  for (const Trajectory& t : trajectories) {
    std::vector<double> series;
    series.reserve(t.states.size());
    for (const EnvState& s : t.states) {
      series.push_back(v.dot(s.x - mean));
    }
    result.projections.push_back(std::move(series));
  }
  return result;
}

EnergyReport energy_estimate(std::int64_t flops, std::int64_t sops) {
  if (flops < 0 || sops < 0) {
    throw ValidationError("operation counts must be non-negative");
  }
  return EnergyReport{flops, sops,
                      static_cast<double>(flops) * kJoulesPerFlop +
                          static_cast<double>(sops) * kJoulesPerSop};
}

EvalArm evaluate(const Environment& env, const PolicyFactory& make_policy,
                 int episodes, std::uint64_t master_seed, int jobs,
                 const std::string& tag) {
  if (episodes < 1) throw ValidationError("episodes must be >= 1");
  struct EpisodeResult {
    Trajectory traj;
    std::uint64_t sops = 0;
    std::uint64_t inferences = 0;
  };
  std::vector<EpisodeResult> results = map_indexed<EpisodeResult>(
      episodes, jobs, [&](int i) {
        std::unique_ptr<Policy> policy = make_policy();
        EpisodeResult r;
        r.traj = rollout(env, *policy, env.spec().horizon,
                         episode_seed(master_seed, i), tag);
        if (auto* snn = dynamic_cast<SnnPolicy*>(policy.get())) {
          r.sops = count_sops(snn->network());
          r.inferences = snn->network().inference_count();
        }
        return r;
      });
  EvalArm arm;
  arm.tag = tag;
  std::vector<double> returns;
  for (EpisodeResult& r : results) {
    returns.push_back(r.traj.total_return());
    arm.trajectories.push_back(std::move(r.traj));
    arm.sops += r.sops;
    arm.inferences += r.inferences;
  }
  arm.returns = mean_half_std(returns);
  return arm;
}

}  // namespace snnloop
