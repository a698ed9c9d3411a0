#ifndef CADLAB_RANDOM_HPP
#define CADLAB_RANDOM_HPP

#include <cstdint>
#include <random>

namespace cadlab {

using Seed = std::uint64_t;
using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based seed derivation: child = splitmix64(master ^ splitmix64(index)).
// Each (master, index) pair names an independent stream, so adding new
// indices never perturbs the seeds already handed out.
inline constexpr Seed derive_seed(Seed master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index));
}

inline constexpr Seed derive_seed(Seed master, std::uint64_t stream, std::uint64_t index) noexcept {
  return derive_seed(derive_seed(master, stream), index);
}

// Named streams used throughout the library. Values are part of the
// reproducibility contract; never renumber.
namespace streams {
inline constexpr std::uint64_t kSampleChunks = 1;
inline constexpr std::uint64_t kAlignmentNoise = 2;
inline constexpr std::uint64_t kOriginals = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kShuffle = 5;
inline constexpr std::uint64_t kTrainData = 6;
inline constexpr std::uint64_t kEvalData = 7;
inline constexpr std::uint64_t kShiftData = 8;
}  // namespace streams

}  // namespace cadlab

#endif  // CADLAB_RANDOM_HPP
