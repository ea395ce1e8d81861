#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace signalmarket {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Independent stream keyed by (master seed, operation tag, index). Streams for
// different keys do not depend on the order in which they are requested.
inline Rng substream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ fnv1a(tag));
  k = splitmix64(k ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
  return Rng(k);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double std_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace signalmarket
