#pragma once

#include <cstdint>
#include <random>

namespace flightcore {

using RngStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent stream for (base_seed, index), e.g. one per environment.
/// Depends only on the pair, never on scheduling.
inline RngStream derive_stream(std::uint64_t base_seed, std::uint64_t index) {
  return RngStream(splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x632be59bd9b4e019ull)));
}

}  // namespace flightcore
