#pragma once

#include <cstdint>
#include <random>

namespace semeq {

using Rng = std::mt19937_64;

// Independent random streams are derived from a single base seed by hashing
// (base, component, index) with splitmix64. Streams for different components
// or indices never share a state sequence, so results do not depend on the
// order in which components consume randomness.
enum class Stream : std::uint64_t {
  world = 1,
  transform = 2,
  anchors = 3,
  channel = 4,
  split = 5,
  sweep = 6,
  kmeans = 7,
  test = 99,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream component,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(base) ^
                    splitmix64((static_cast<std::uint64_t>(component) << 32) ^ index));
}

inline Rng make_rng(std::uint64_t base, Stream component, std::uint64_t index = 0) {
  return Rng(derive_seed(base, component, index));
}

}  // namespace semeq
