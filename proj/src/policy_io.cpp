#include "snnloop/policy_io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "snnloop/errors.hpp"

namespace snnloop {
namespace {

using nlohmann::json;

std::string fmt_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << '[';
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << fmt_real(v[i]);
  }
  os << ']';
}

void write_matrix_rows(std::ostream& os, const Eigen::MatrixXd& m) {
  os << '[';
  for (int r = 0; r < m.rows(); ++r) {
    if (r) os << ',';
    os << '[';
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << fmt_real(m(r, c));
    }
    os << ']';
  }
  os << ']';
}

void write_layers(std::ostream& os, const std::vector<DenseLayer>& layers) {
  os << "\"layers\":[";
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l) os << ',';
    os << "{\"w\":";
    write_matrix_rows(os, layers[l].weights);
    os << ",\"b\":";
    write_vector(os, layers[l].bias);
    os << '}';
  }
  os << ']';
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << body;
  if (!out) {
    throw Error("write failed for '" + path.string() + "'");
  }
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

const json& require(const json& j, const char* field,
                    const std::filesystem::path& path) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw ParseError(path.string() + ": missing field '" + field + "'");
  }
  return *it;
}

Eigen::VectorXd read_vector(const json& j, const std::string& ctx,
                            const std::filesystem::path& path) {
  if (!j.is_array()) {
    throw ParseError(path.string() + ": " + ctx + " must be an array");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(path.string() + ": " + ctx + "[" + std::to_string(i) +
                       "] is not a number");
    }
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& ctx,
                            const std::filesystem::path& path) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(path.string() + ": " + ctx +
                     " must be a non-empty array of rows");
  }
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    Eigen::VectorXd row =
        read_vector(j[r], ctx + " row " + std::to_string(r), path);
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw ParseError(path.string() + ": " + ctx + " row " +
                       std::to_string(r) + " has inconsistent length");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

std::vector<DenseLayer> read_layers(const json& j,
                                    const std::filesystem::path& path) {
  const json& layers_json = require(j, "layers", path);
  if (!layers_json.is_array() || layers_json.empty()) {
    throw ValidationError(path.string() + ": 'layers' must be non-empty");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l < layers_json.size(); ++l) {
    const std::string ctx = "layer " + std::to_string(l);
    DenseLayer layer;
    layer.weights =
        read_matrix(require(layers_json[l], "w", path), ctx + " w", path);
    layer.bias =
        read_vector(require(layers_json[l], "b", path), ctx + " b", path);
    layers.push_back(std::move(layer));
  }
  return layers;
}

MlpPolicy policy_from_json(const json& j, const std::filesystem::path& path) {
  const int obs_dim = require(j, "obs_dim", path).get<int>();
  const int act_dim = require(j, "act_dim", path).get<int>();
  const double scale = require(j, "action_scale", path).get<double>();
  MlpPolicy policy(read_layers(j, path), scale);
  if (policy.obs_dim() != obs_dim || policy.act_dim() != act_dim) {
    throw ValidationError(path.string() +
                          ": declared obs/act dims do not match layers");
  }
  return policy;
}

}  // namespace

void save_policy(const MlpPolicy& policy, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "{\"obs_dim\":" << policy.obs_dim()
     << ",\"act_dim\":" << policy.act_dim()
     << ",\"action_scale\":" << fmt_real(policy.action_scale()) << ',';
  write_layers(os, policy.layers());
  os << "}\n";
  write_file(path, os.str());
}

MlpPolicy load_policy(const std::filesystem::path& path) {
  return policy_from_json(parse_file(path), path);
}

void save_spiking_network(const SpikingNetwork& net,
                          const std::filesystem::path& path) {
  std::vector<DenseLayer> layers;
  for (int l = 0; l < net.num_hidden(); ++l) {
    const SpikingLayer& h = net.hidden(l);
    // Persist the source bias so the file also loads as a plain policy.
    layers.push_back(
        {h.weights, net.kind().differential ? h.memory_bias : h.bias});
  }
  layers.push_back(net.output_layer());

  const NeuronKind& kind = net.kind();
  std::string kind_name;
  switch (kind.base) {
    case NeuronKind::Base::IF:
      kind_name = "if";
      break;
    case NeuronKind::Base::SNM:
      kind_name = "snm";
      break;
    case NeuronKind::Base::MT:
      kind_name = "mt";
      break;
  }
  std::string inner = kind_name;
  if (kind.differential) kind_name = "dc";

  std::ostringstream os;
  os << "{\"obs_dim\":" << net.obs_dim() << ",\"act_dim\":" << net.act_dim()
     << ",\"action_scale\":" << fmt_real(net.action_scale()) << ',';
  write_layers(os, layers);
  os << ",\"neuron\":{\"kind\":\"" << kind_name << "\",\"n\":"
     << kind.thresholds << ",\"inner\":\"" << inner << "\""
     << ",\"snm_literal\":" << (kind.snm_literal ? "true" : "false") << '}'
     << ",\"theta\":[";
  for (int l = 0; l < net.num_hidden(); ++l) {
    if (l) os << ',';
    write_vector(os, net.hidden(l).theta);
  }
  os << "],\"T\":" << net.T() << "}\n";
  write_file(path, os.str());
}

SpikingNetwork load_spiking_network(const std::filesystem::path& path) {
  const json j = parse_file(path);
  MlpPolicy policy = policy_from_json(j, path);

  const json& neuron = require(j, "neuron", path);
  NeuronKind kind = parse_neuron_kind(
      require(neuron, "kind", path).get<std::string>(),
      neuron.value("n", 4), neuron.value("inner", std::string("mt")));
  kind.snm_literal = neuron.value("snm_literal", false);

  const json& theta_json = require(j, "theta", path);
  if (!theta_json.is_array()) {
    throw ParseError(path.string() + ": 'theta' must be an array");
  }
  std::vector<Eigen::VectorXd> theta;
  for (std::size_t l = 0; l < theta_json.size(); ++l) {
    theta.push_back(
        read_vector(theta_json[l], "theta " + std::to_string(l), path));
  }
  const int T = require(j, "T", path).get<int>();
  return convert(policy, kind, T, theta);
}

}  // namespace snnloop
