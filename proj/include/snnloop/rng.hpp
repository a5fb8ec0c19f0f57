#pragma once

#include <cstdint>
#include <random>

namespace snnloop {

// splitmix64 finalizer; used to derive independent stream seeds from
// (master seed, stream tag, index) without correlated low bits.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return mix_seed(mix_seed(master ^ mix_seed(stream)) + index);
}

// Stream tags for the experiment pipeline. Keeping them in one place makes
// seed bookkeeping auditable.
namespace seed_stream {
inline constexpr std::uint64_t kEpisode = 0x45504953;      // eval/report episodes
inline constexpr std::uint64_t kDataset = 0x44415441;      // expert dataset rollouts
inline constexpr std::uint64_t kTrainer = 0x42435452;      // BC init + shuffling
inline constexpr std::uint64_t kCalibration = 0x43414c42;  // threshold calibration
}  // namespace seed_stream

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(mix_seed(seed));
}

}  // namespace snnloop
