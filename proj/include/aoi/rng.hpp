#pragma once

// Keyed random draws. Every draw is a pure function of (seed, stream name,
// counters), so one consumer's draws never shift another's.

#include <cstdint>
#include <random>
#include <string_view>

#include "aoi/catalog.hpp"

namespace aoi {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t keyed_hash(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ fnv1a64(stream));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ (c * 0xc2b2ae3d27d4eb4fULL));
  return h;
}

/// Uniform in [0, 1).
inline double keyed_unit(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
  return static_cast<double>(keyed_hash(seed, stream, a, b, c) >> 11) * 0x1.0p-53;
}

/// A sequence generator for one keyed stream.
inline std::mt19937_64 keyed_engine(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
  return std::mt19937_64(keyed_hash(seed, stream, a, b, c));
}

}  // namespace aoi
