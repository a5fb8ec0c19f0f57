#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "snnloop/config.hpp"

namespace snnloop {

// All experiment artifacts embed the canonical config, its hash and the
// master seed, so any file can be traced back to the exact invocation.
// CSV files carry one `#` comment line followed by a header row; JSON
// files carry the same information as fields.

std::string artifact_header(const ExperimentConfig& config);

void write_csv(const std::filesystem::path& path,
               const ExperimentConfig& config,
               const std::string& column_names,
               const std::vector<std::string>& rows);

// `body` must be an object; provenance fields are added to it.
void write_json_artifact(const std::filesystem::path& path,
                         const ExperimentConfig& config,
                         const std::string& body_json);

std::string csv_real(double value);

}  // namespace snnloop
