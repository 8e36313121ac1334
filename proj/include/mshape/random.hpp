#pragma once

#include <cstdint>
#include <random>

namespace mshape {

// Each random stream is keyed by (seed, purpose, index). Streams for distinct
// keys are seeded through two rounds of the SplitMix64 finalizer, so path i of
// a bundle never depends on how many other paths are generated.
enum class Stream : std::uint64_t {
  Paths = 1,
  Restart = 2,
  CopyA = 3,
  CopyB = 4,
  CopyC = 5,
};

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream purpose, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed ^ (static_cast<std::uint64_t>(purpose) * 0xd1b54a32d192ed03ULL));
  return splitmix64(key + splitmix64(index));
}

inline Engine make_engine(std::uint64_t seed, Stream purpose, std::uint64_t index) {
  return Engine(derive_seed(seed, purpose, index));
}

}  // namespace mshape
