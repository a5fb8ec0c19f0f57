// snnloop: reproducible experiment runner for converted spiking policies in
// closed-loop control. Every subcommand is fully determined by one config
// (file + flag overrides) and a master seed; artifacts embed both.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "snnloop/analysis.hpp"
#include "snnloop/artifacts.hpp"
#include "snnloop/bc.hpp"
#include "snnloop/config.hpp"
#include "snnloop/crpi.hpp"
#include "snnloop/env.hpp"
#include "snnloop/errors.hpp"
#include "snnloop/pipeline.hpp"
#include "snnloop/policy.hpp"
#include "snnloop/policy_io.hpp"
#include "snnloop/rng.hpp"
#include "snnloop/rollout.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace snnloop;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> env, neuron, dc_inner, out_dir;
  std::optional<int> mt_n, T, episodes, horizon, calibration_size, jobs,
      smooth_window, bc_epochs, bc_batch_size, bc_dataset_episodes;
  std::optional<double> alpha, bc_learning_rate, bc_momentum, bc_noise;
  std::optional<std::vector<double>> alpha_grid;
  std::optional<std::uint64_t> master_seed;
  std::optional<bool> snm_literal, crpi, crpi_symmetric_clip;
  std::optional<std::vector<int>> hidden;
};

void add_common_options(CLI::App* cmd, Overrides* o) {
  cmd->add_option("--config", o->config_path, "flat JSON config file");
  cmd->add_option("--env", o->env, "double_integrator|pendulum");
  cmd->add_option("--neuron", o->neuron, "if|snm|mt|dc");
  cmd->add_option("--mt-n", o->mt_n, "MT threshold count");
  cmd->add_option("--dc-inner", o->dc_inner, "if|mt");
  cmd->add_option("--snm-literal", o->snm_literal,
                  "verbatim SNM negative-spike rule");
  cmd->add_option("-T,--T", o->T, "simulation steps per decision step");
  cmd->add_option("--alpha", o->alpha, "residual carry coefficient");
  cmd->add_option("--alphas", o->alpha_grid, "alpha grid for sweeps");
  cmd->add_option("--crpi", o->crpi, "enable cross-step residual carry");
  cmd->add_option("--symmetric-clip", o->crpi_symmetric_clip,
                  "clip carried membranes to [-theta, theta]");
  cmd->add_option("--episodes", o->episodes, "episodes per arm");
  cmd->add_option("--horizon", o->horizon, "decision steps per episode");
  cmd->add_option("--seed", o->master_seed, "master seed");
  cmd->add_option("--calibration-size", o->calibration_size,
                  "observations for threshold calibration");
  cmd->add_option("--jobs", o->jobs, "episode worker threads");
  cmd->add_option("--smooth-window", o->smooth_window,
                  "per-step reward smoothing window");
  cmd->add_option("--bc-lr", o->bc_learning_rate, "BC learning rate");
  cmd->add_option("--bc-momentum", o->bc_momentum, "BC momentum");
  cmd->add_option("--bc-batch", o->bc_batch_size, "BC batch size");
  cmd->add_option("--bc-epochs", o->bc_epochs, "BC epochs");
  cmd->add_option("--bc-dataset-episodes", o->bc_dataset_episodes,
                  "expert episodes in the BC dataset");
  cmd->add_option("--bc-noise", o->bc_noise,
                  "exploration noise while collecting the dataset");
  cmd->add_option("--hidden", o->hidden, "hidden layer widths");
  cmd->add_option("-o,--out", o->out_dir, "output directory");
}

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) c = ExperimentConfig::load(o.config_path);
  if (o.env) c.env = *o.env;
  if (o.neuron) c.neuron = *o.neuron;
  if (o.mt_n) c.mt_n = *o.mt_n;
  if (o.dc_inner) c.dc_inner = *o.dc_inner;
  if (o.snm_literal) c.snm_literal = *o.snm_literal;
  if (o.T) c.T = *o.T;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.alpha_grid) c.alpha_grid = *o.alpha_grid;
  if (o.crpi) c.crpi = *o.crpi;
  if (o.crpi_symmetric_clip) c.crpi_symmetric_clip = *o.crpi_symmetric_clip;
  if (o.episodes) c.episodes = *o.episodes;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.master_seed) c.master_seed = *o.master_seed;
  if (o.calibration_size) c.calibration_size = *o.calibration_size;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.smooth_window) c.smooth_window = *o.smooth_window;
  if (o.bc_learning_rate) c.bc_learning_rate = *o.bc_learning_rate;
  if (o.bc_momentum) c.bc_momentum = *o.bc_momentum;
  if (o.bc_batch_size) c.bc_batch_size = *o.bc_batch_size;
  if (o.bc_epochs) c.bc_epochs = *o.bc_epochs;
  if (o.bc_dataset_episodes) c.bc_dataset_episodes = *o.bc_dataset_episodes;
  if (o.bc_noise) c.bc_noise = *o.bc_noise;
  if (o.hidden) c.hidden = *o.hidden;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (const char* env_seed = std::getenv("SNNLOOP_SEED")) {
    c.master_seed = std::stoull(env_seed);
  }
  c.validate();
  return c;
}

fs::path prepare_out(const ExperimentConfig& c) {
  fs::path dir(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------

std::optional<double> crpi_alpha(const ExperimentConfig& c) {
  if (c.crpi) return c.alpha;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

int cmd_train_expert(const ExperimentConfig& c) {
  const fs::path out = prepare_out(c);
  std::unique_ptr<Environment> env = c.build_env();
  BcResult result = train_expert_policy(*env, c);
  save_policy(result.policy, out / "policy.json");
  std::cout << "final training MSE " << result.final_mse << "\n"
            << "policy written to " << (out / "policy.json").string()
            << std::endl;
  return 0;
}

int cmd_convert(const ExperimentConfig& c, const std::string& policy_path) {
  const fs::path out = prepare_out(c);
  std::unique_ptr<Environment> env = c.build_env();
  MlpPolicy policy = load_policy(
      policy_path.empty() ? (out / "policy.json").string() : policy_path);

  SpikingNetwork net = convert_policy(*env, policy, c);
  std::cout << "converted network (" << c.neuron_kind().describe()
            << ", T=" << c.T << ") written to " << (out / "snn.json").string()
            << std::endl;
  save_spiking_network(net, out / "snn.json");
  return 0;
}

struct LoadedArms {
  std::unique_ptr<Environment> env;
  MlpPolicy policy;
  SpikingNetwork snn;
};

LoadedArms load_arms(const ExperimentConfig& c, const std::string& policy_path,
                     const std::string& snn_path) {
  const fs::path out(c.out_dir);
  std::unique_ptr<Environment> env = c.build_env();
  MlpPolicy policy = load_policy(
      policy_path.empty() ? (out / "policy.json").string() : policy_path);
  SpikingNetwork snn = load_spiking_network(
      snn_path.empty() ? (out / "snn.json").string() : snn_path);
  if (policy.obs_dim() != env->spec().obs_dim ||
      policy.act_dim() != env->spec().act_dim) {
    throw ValidationError("policy dimensions do not match environment '" +
                          env->spec().name + "'");
  }
  if (snn.obs_dim() != policy.obs_dim() || snn.act_dim() != policy.act_dim()) {
    throw ValidationError("converted network does not match the policy");
  }
  return LoadedArms{std::move(env), std::move(policy), std::move(snn)};
}

int cmd_eval(const ExperimentConfig& c, const std::string& policy_path,
             const std::string& snn_path, bool with_expert) {
  const fs::path out = prepare_out(c);
  LoadedArms arms = load_arms(c, policy_path, snn_path);

  std::vector<EvalArm> results;
  results.push_back(evaluate(
      *arms.env, [&]() { return std::make_unique<AnnPolicy>(arms.policy); },
      c.episodes, c.master_seed, c.jobs, "ann"));
  results.push_back(evaluate(
      *arms.env,
      [&]() {
        return std::make_unique<SnnPolicy>(arms.snn, crpi_alpha(c),
                                           c.crpi_symmetric_clip);
      },
      c.episodes, c.master_seed, c.jobs, "snn"));
  if (with_expert) {
    results.push_back(evaluate(
        *arms.env,
        [&]() { return std::make_unique<ExpertPolicy>(*arms.env); },
        c.episodes, c.master_seed, c.jobs, "expert"));
  }

  std::vector<std::string> rows;
  for (const EvalArm& arm : results) {
    rows.push_back(arm.tag + "," + std::to_string(c.episodes) + "," +
                   csv_real(arm.returns.mean) + "," +
                   csv_real(arm.returns.half_std));
  }
  write_csv(out / "eval.csv", c, "policy,episodes,mean_return,half_std", rows);

  std::vector<std::string> step_rows;
  for (const EvalArm& arm : results) {
    for (const PerStepReward& r :
         per_step_rewards(arm.trajectories, c.smooth_window)) {
      step_rows.push_back(std::to_string(r.k) + "," + csv_real(r.mean_reward) +
                          "," + csv_real(r.half_std) + "," + arm.tag);
    }
  }
  write_csv(out / "per_step_rewards.csv", c, "k,mean_reward,half_std,policy",
            step_rows);

  // Matched first-episode pair projected onto the joint first principal
  // component.
  PcaResult pca = pca_project(
      {results[0].trajectories.front(), results[1].trajectories.front()});
  std::vector<std::string> pca_rows;
  for (std::size_t arm = 0; arm < 2; ++arm) {
    const std::vector<double>& series = pca.projections[arm];
    for (std::size_t k = 0; k < series.size(); ++k) {
      pca_rows.push_back(std::to_string(k) + "," + csv_real(series[k]) + "," +
                         results[arm].tag);
    }
  }
  write_csv(out / "pca_projection.csv", c, "k,projection,policy", pca_rows);

  for (const EvalArm& arm : results) {
    std::cout << arm.tag << ": mean return " << arm.returns.mean << " +- "
              << arm.returns.half_std << " (half std, " << c.episodes
              << " episodes)\n";
  }
  return 0;
}

int cmd_decompose(const ExperimentConfig& c, const std::string& policy_path,
                  const std::string& snn_path) {
  const fs::path out = prepare_out(c);
  LoadedArms arms = load_arms(c, policy_path, snn_path);
  DecompositionReport rep = reward_decomposition(
      *arms.env, arms.policy, arms.snn,
      SnnOptions{crpi_alpha(c), c.crpi_symmetric_clip}, c.episodes,
      c.master_seed, c.jobs);

  json j;
  auto put = [&j](const char* name, const MeanStd& ms) {
    j[name] = {{"mean", ms.mean}, {"half_std", ms.half_std}};
  };
  put("r_ann", rep.r_ann);
  put("r_snn", rep.r_snn);
  put("r_snn_given_ann", rep.r_snn_given_ann);
  put("r_ann_given_snn", rep.r_ann_given_snn);
  j["episodes"] = rep.episodes;
  write_json_artifact(out / "decomposition.json", c, j.dump());
  std::cout << "R_ann " << rep.r_ann.mean << ", R_snn " << rep.r_snn.mean
            << ", R_snn|ann " << rep.r_snn_given_ann.mean << ", R_ann|snn "
            << rep.r_ann_given_snn.mean << std::endl;
  return 0;
}

int cmd_correlate(const ExperimentConfig& c, const std::string& policy_path,
                  const std::string& snn_path) {
  const fs::path out = prepare_out(c);
  LoadedArms arms = load_arms(c, policy_path, snn_path);
  CorrelationReport rep = cross_step_correlations(
      *arms.env, arms.policy, arms.snn,
      SnnOptions{crpi_alpha(c), c.crpi_symmetric_clip}, c.episodes,
      c.master_seed, c.jobs);

  json j;
  j["ann_correction"] = rep.ann_correction;
  j["snn_consistency"] = rep.snn_consistency;
  j["snn_drift"] = rep.snn_drift;
  j["n_pairs"] = rep.n_pairs;
  write_json_artifact(out / "correlations.json", c, j.dump());

  std::vector<std::string> rows = {
      "ann_correction," + csv_real(rep.ann_correction) + "," +
          std::to_string(rep.n_pairs),
      "snn_consistency," + csv_real(rep.snn_consistency) + "," +
          std::to_string(rep.n_pairs),
      "snn_drift," + csv_real(rep.snn_drift) + "," +
          std::to_string(rep.n_pairs)};
  write_csv(out / "correlations.csv", c, "metric,value,n_pairs", rows);
  std::cout << "ann_correction " << rep.ann_correction << ", snn_consistency "
            << rep.snn_consistency << ", snn_drift " << rep.snn_drift << " ("
            << rep.n_pairs << " pairs)" << std::endl;
  return 0;
}

int cmd_sweep_alpha(const ExperimentConfig& c, const std::string& policy_path,
                    const std::string& snn_path, bool residual_trace_dump) {
  const fs::path out = prepare_out(c);
  LoadedArms arms = load_arms(c, policy_path, snn_path);

  AlphaPerformanceTable table = alpha_performance_sweep(
      *arms.env, arms.policy, arms.snn, c.alpha_grid, c.crpi_symmetric_clip,
      c.episodes, c.master_seed, c.jobs);
  {
    std::vector<std::string> rows;
    rows.push_back("# ratio_form=" +
                   std::string(table.regret_form ? "regret" : "plain") +
                   " r_worst=" + csv_real(table.r_worst) +
                   " ann_mean=" + csv_real(table.ann.mean) +
                   " ann_half_std=" + csv_real(table.ann.half_std));
    for (const AlphaPerformanceRow& r : table.rows) {
      rows.push_back(csv_real(r.alpha) + "," + csv_real(r.mean_return) + "," +
                     csv_real(r.half_std) + "," + csv_real(r.ratio));
    }
    write_csv(out / "alpha_sweep.csv", c, "alpha,mean_return,half_std,ratio",
              rows);
  }

  std::vector<ResidualCorrelationRow> res = residual_correlation_sweep(
      *arms.env, arms.policy, arms.snn, c.alpha_grid, c.crpi_symmetric_clip,
      c.episodes, c.master_seed, c.jobs);
  {
    std::vector<std::string> rows;
    for (const ResidualCorrelationRow& r : res) {
      rows.push_back(csv_real(r.alpha) + "," + csv_real(r.residual_cosine) +
                     "," + csv_real(r.snn_consistency) + "," +
                     csv_real(r.snn_drift));
    }
    write_csv(out / "residual_correlation.csv", c,
              "alpha,residual_cosine,snn_consistency,snn_drift", rows);
  }

  if (residual_trace_dump) {
    std::vector<ResidualTraceRow> trace = residual_trace(
        *arms.env, arms.snn, SnnOptions{c.alpha, c.crpi_symmetric_clip},
        c.horizon, derive_seed(c.master_seed, seed_stream::kEpisode, 0));
    std::vector<std::string> rows;
    for (const ResidualTraceRow& r : trace) {
      rows.push_back(std::to_string(r.k) + "," + std::to_string(r.layer) +
                     "," + csv_real(r.mean_eps) + "," + csv_real(r.cos_prev));
    }
    write_csv(out / "residual_trace.csv", c, "k,layer,mean_eps,cos_prev",
              rows);
  }

  std::cout << "alpha sweep over " << c.alpha_grid.size() << " points, "
            << c.episodes << " matched episodes each; tables in "
            << out.string() << std::endl;
  return 0;
}

int cmd_energy(const ExperimentConfig& c, const std::string& policy_path,
               const std::string& snn_path) {
  const fs::path out = prepare_out(c);
  LoadedArms arms = load_arms(c, policy_path, snn_path);

  EvalArm snn_arm = evaluate(
      *arms.env,
      [&]() {
        return std::make_unique<SnnPolicy>(arms.snn, crpi_alpha(c),
                                           c.crpi_symmetric_clip);
      },
      c.episodes, c.master_seed, c.jobs, "snn");

  const std::int64_t flops_per_inference = count_flops(arms.policy);
  const std::int64_t inferences =
      static_cast<std::int64_t>(snn_arm.inferences);
  EnergyReport ann_total =
      energy_estimate(flops_per_inference * inferences, 0);
  EnergyReport snn_total =
      energy_estimate(0, static_cast<std::int64_t>(snn_arm.sops));

  json j;
  j["inferences"] = inferences;
  j["ann"] = {{"flops", ann_total.flops},
              {"sops", 0},
              {"energy_joules", ann_total.energy_joules},
              {"flops_per_inference", flops_per_inference},
              {"energy_joules_per_inference",
               ann_total.energy_joules / static_cast<double>(inferences)}};
  j["snn"] = {{"flops", 0},
              {"sops", snn_total.sops},
              {"energy_joules", snn_total.energy_joules},
              {"sops_per_inference",
               static_cast<double>(snn_total.sops) /
                   static_cast<double>(inferences)},
              {"energy_joules_per_inference",
               snn_total.energy_joules / static_cast<double>(inferences)}};
  write_json_artifact(out / "energy.json", c, j.dump());

  std::cout << "ann: " << flops_per_inference << " FLOPs/inference, "
            << ann_total.energy_joules / inferences * 1e6 << " uJ/inference\n"
            << "snn: "
            << static_cast<double>(snn_total.sops) / inferences
            << " SOPs/inference, "
            << snn_total.energy_joules / inferences * 1e6 << " uJ/inference"
            << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop analysis of ANN-to-SNN converted controllers"};
  app.require_subcommand(1);

  Overrides o;
  std::string policy_path, snn_path;
  bool with_expert = false;
  bool residual_trace_dump = false;

  CLI::App* train = app.add_subcommand(
      "train-expert", "behavior-clone the analytic expert into a policy file");
  add_common_options(train, &o);

  CLI::App* conv = app.add_subcommand(
      "convert", "calibrate thresholds and convert a policy to a spiking net");
  add_common_options(conv, &o);
  conv->add_option("--policy", policy_path, "policy file (default out/policy.json)");

  auto add_arm_options = [&](CLI::App* cmd) {
    add_common_options(cmd, &o);
    cmd->add_option("--policy", policy_path,
                    "policy file (default out/policy.json)");
    cmd->add_option("--snn", snn_path,
                    "converted network file (default out/snn.json)");
  };

  CLI::App* eval = app.add_subcommand("eval", "matched-seed returns table");
  add_arm_options(eval);
  eval->add_flag("--expert", with_expert, "also evaluate the analytic expert");

  CLI::App* dec = app.add_subcommand("decompose",
                                     "reward decomposition across policies");
  add_arm_options(dec);

  CLI::App* corr = app.add_subcommand(
      "correlate", "cross-step action-error cosine metrics");
  add_arm_options(corr);

  CLI::App* sweep = app.add_subcommand(
      "sweep-alpha", "performance and residual-correlation tables over alpha");
  add_arm_options(sweep);
  sweep->add_flag("--residual-trace", residual_trace_dump,
                  "dump a per-step residual trace for the configured alpha");

  CLI::App* energy = app.add_subcommand(
      "energy", "FLOP/SOP counts and the energy estimate");
  add_arm_options(energy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const ExperimentConfig config = resolve_config(o);
    if (train->parsed()) return cmd_train_expert(config);
    if (conv->parsed()) return cmd_convert(config, policy_path);
    if (eval->parsed())
      return cmd_eval(config, policy_path, snn_path, with_expert);
    if (dec->parsed()) return cmd_decompose(config, policy_path, snn_path);
    if (corr->parsed()) return cmd_correlate(config, policy_path, snn_path);
    if (sweep->parsed())
      return cmd_sweep_alpha(config, policy_path, snn_path,
                             residual_trace_dump);
    if (energy->parsed()) return cmd_energy(config, policy_path, snn_path);
    std::cerr << "no subcommand" << std::endl;
    return 1;
  } catch (const NumericFault& e) {
    std::cerr << "numeric fault: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
