#pragma once

#include <cstdint>
#include <random>

namespace scou {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream `index` derived from a base seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng{splitmix64(seed ^ splitmix64(index + 0x5851F42D4C957F2DULL))};
}

// Uniform in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace scou
