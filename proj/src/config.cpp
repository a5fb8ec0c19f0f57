#include "snnloop/config.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "snnloop/errors.hpp"

namespace snnloop {
namespace {

using nlohmann::json;

json to_canonical(const ExperimentConfig& c) {
  json j;
  j["env"] = c.env;
  j["neuron"] = c.neuron;
  j["mt_n"] = c.mt_n;
  j["dc_inner"] = c.dc_inner;
  j["snm_literal"] = c.snm_literal;
  j["T"] = c.T;
  j["alpha"] = c.alpha;
  j["alpha_grid"] = c.alpha_grid;
  j["crpi"] = c.crpi;
  j["crpi_symmetric_clip"] = c.crpi_symmetric_clip;
  j["episodes"] = c.episodes;
  j["horizon"] = c.horizon;
  j["master_seed"] = c.master_seed;
  j["calibration_size"] = c.calibration_size;
  j["jobs"] = c.jobs;
  j["smooth_window"] = c.smooth_window;
  j["bc_learning_rate"] = c.bc_learning_rate;
  j["bc_momentum"] = c.bc_momentum;
  j["bc_batch_size"] = c.bc_batch_size;
  j["bc_epochs"] = c.bc_epochs;
  j["bc_dataset_episodes"] = c.bc_dataset_episodes;
  j["bc_noise"] = c.bc_noise;
  j["hidden"] = c.hidden;
  j["out_dir"] = c.out_dir;
  if (c.init_lo) j["init_lo"] = *c.init_lo;
  if (c.init_hi) j["init_hi"] = *c.init_hi;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (T < 1) {
    throw ValidationError("T must be >= 1 (got " + std::to_string(T) + ")");
  }
  if (episodes < 1) {
    throw ValidationError("episodes must be >= 1 (got " +
                          std::to_string(episodes) + ")");
  }
  if (horizon < 1) {
    throw ValidationError("horizon must be >= 1 (got " +
                          std::to_string(horizon) + ")");
  }
  if (calibration_size < 1) {
    throw ValidationError("calibration_size must be >= 1");
  }
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  if (smooth_window < 1) throw ValidationError("smooth_window must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must be in [0, 1]");
  }
  for (double a : alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ValidationError("alpha_grid values must be in [0, 1]");
    }
  }
  if (alpha_grid.empty()) throw ValidationError("alpha_grid must be non-empty");
  if (hidden.empty()) throw ValidationError("hidden widths must be non-empty");
  for (int h : hidden) {
    if (h < 1) throw ValidationError("hidden widths must be positive");
  }
  if (bc_batch_size < 1) throw ValidationError("bc_batch_size must be >= 1");
  if (bc_epochs < 0) throw ValidationError("bc_epochs must be >= 0");
  if (bc_dataset_episodes < 1) {
    throw ValidationError("bc_dataset_episodes must be >= 1");
  }
  if (!(bc_learning_rate >= 0.0) || !std::isfinite(bc_learning_rate)) {
    throw ValidationError("bc_learning_rate must be finite and >= 0");
  }
  if (bc_momentum < 0.0 || bc_momentum >= 1.0) {
    throw ValidationError("bc_momentum must be in [0, 1)");
  }
  if (bc_noise < 0.0) throw ValidationError("bc_noise must be >= 0");
  if (init_lo.has_value() != init_hi.has_value()) {
    throw ValidationError("init_lo and init_hi must be given together");
  }
  if (init_lo && (init_lo->size() != 2 || init_hi->size() != 2)) {
    throw ValidationError("init bounds must have two entries");
  }
  neuron_kind();  // validates neuron fields
}

NeuronKind ExperimentConfig::neuron_kind() const {
  NeuronKind kind = parse_neuron_kind(neuron, mt_n, dc_inner);
  kind.snm_literal = snm_literal;
  return kind;
}

std::unique_ptr<Environment> ExperimentConfig::build_env() const {
  std::unique_ptr<Environment> e = make_env(env);
  e->set_horizon(horizon);
  if (init_lo) {
    e->set_init_bounds(Eigen::Vector2d((*init_lo)[0], (*init_lo)[1]),
                       Eigen::Vector2d((*init_hi)[0], (*init_hi)[1]));
  }
  return e;
}

std::string ExperimentConfig::to_json() const {
  return to_canonical(*this).dump();
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: expected a JSON object");

  static const std::set<std::string> known = {
      "env",          "neuron",        "mt_n",
      "dc_inner",     "snm_literal",   "T",
      "alpha",        "alpha_grid",    "crpi",
      "crpi_symmetric_clip",           "episodes",
      "horizon",      "master_seed",   "calibration_size",
      "jobs",         "smooth_window", "bc_learning_rate",
      "bc_momentum",  "bc_batch_size", "bc_epochs",
      "bc_dataset_episodes",           "bc_noise",
      "hidden",       "out_dir",       "init_lo",
      "init_hi"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }

  ExperimentConfig c;
  try {
    c.env = j.value("env", c.env);
    c.neuron = j.value("neuron", c.neuron);
    c.mt_n = j.value("mt_n", c.mt_n);
    c.dc_inner = j.value("dc_inner", c.dc_inner);
    c.snm_literal = j.value("snm_literal", c.snm_literal);
    c.T = j.value("T", c.T);
    c.alpha = j.value("alpha", c.alpha);
    c.alpha_grid = j.value("alpha_grid", c.alpha_grid);
    c.crpi = j.value("crpi", c.crpi);
    c.crpi_symmetric_clip =
        j.value("crpi_symmetric_clip", c.crpi_symmetric_clip);
    c.episodes = j.value("episodes", c.episodes);
    c.horizon = j.value("horizon", c.horizon);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.calibration_size = j.value("calibration_size", c.calibration_size);
    c.jobs = j.value("jobs", c.jobs);
    c.smooth_window = j.value("smooth_window", c.smooth_window);
    c.bc_learning_rate = j.value("bc_learning_rate", c.bc_learning_rate);
    c.bc_momentum = j.value("bc_momentum", c.bc_momentum);
    c.bc_batch_size = j.value("bc_batch_size", c.bc_batch_size);
    c.bc_epochs = j.value("bc_epochs", c.bc_epochs);
    c.bc_dataset_episodes =
        j.value("bc_dataset_episodes", c.bc_dataset_episodes);
    c.bc_noise = j.value("bc_noise", c.bc_noise);
    c.hidden = j.value("hidden", c.hidden);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("init_lo")) {
      c.init_lo = j["init_lo"].get<std::vector<double>>();
    }
    if (j.contains("init_hi")) {
      c.init_hi = j["init_hi"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return to_canonical(*this) == to_canonical(other);
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string dump = config.to_json();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace snnloop
