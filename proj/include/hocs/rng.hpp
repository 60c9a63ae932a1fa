#pragma once

// Counter-based random streams: the phase at (seed, sample k, arm n, pixel p)
// is a pure function of those four integers, so any subset of samples can be
// regenerated on any worker in any order with identical results.

#include <cstdint>

namespace hocs {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

struct RngPolicy {
  std::uint64_t master_seed = 0;

  std::uint64_t word(std::uint64_t sample, std::uint32_t arm, std::uint32_t pixel) const {
    std::uint64_t h = detail::splitmix64(master_seed ^ 0x8f1bbcdcbfa53e0bull);
    h = detail::splitmix64(h ^ sample);
    h = detail::splitmix64(h ^ ((std::uint64_t(arm) << 32) | pixel));
    return h;
  }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform(std::uint64_t sample, std::uint32_t arm, std::uint32_t pixel) const {
    return (word(sample, arm, pixel) >> 11) * 0x1.0p-53;
  }
};

}  // namespace hocs
