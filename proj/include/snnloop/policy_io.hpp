#pragma once

#include <filesystem>

#include "snnloop/mlp.hpp"
#include "snnloop/spiking.hpp"

namespace snnloop {

// Weight files are a single JSON document
//   {"obs_dim":N,"act_dim":M,"action_scale":S,
//    "layers":[{"w":[[...row...],...],"b":[...]},...]}
// with reals written at 17 significant digits so a save/load round trip is
// bit-exact. Hidden activations are implicitly ReLU, the output implicitly
// tanh-scaled.
void save_policy(const MlpPolicy& policy, const std::filesystem::path& path);
MlpPolicy load_policy(const std::filesystem::path& path);

// Converted networks extend the policy document with
//   "neuron":{"kind":"if|snm|mt|dc","n":...,"inner":"if|mt"},
//   "theta":[[per-channel reals],...], "T":N
void save_spiking_network(const SpikingNetwork& net,
                          const std::filesystem::path& path);
SpikingNetwork load_spiking_network(const std::filesystem::path& path);

}  // namespace snnloop
