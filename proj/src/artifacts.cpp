#include "snnloop/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "snnloop/errors.hpp"

namespace snnloop {

std::string artifact_header(const ExperimentConfig& config) {
  return "# config_hash=" + config_hash(config) +
         " master_seed=" + std::to_string(config.master_seed) +
         " config=" + config.to_json();
}

void write_csv(const std::filesystem::path& path,
               const ExperimentConfig& config,
               const std::string& column_names,
               const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << artifact_header(config) << '\n' << column_names << '\n';
  for (const std::string& row : rows) out << row << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_json_artifact(const std::filesystem::path& path,
                         const ExperimentConfig& config,
                         const std::string& body_json) {
  nlohmann::json j = nlohmann::json::parse(body_json);
  j["config"] = nlohmann::json::parse(config.to_json());
  j["config_hash"] = config_hash(config);
  j["master_seed"] = config.master_seed;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string csv_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace snnloop
