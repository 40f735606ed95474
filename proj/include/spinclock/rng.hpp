#pragma once

#include <cstdint>
#include <random>

namespace spinclock {

using RandomEngine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of an independent sub-stream, keyed on (master seed, index).
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Per-shot generator. Depends only on its key, never on scheduling.
inline RandomEngine make_stream(std::uint64_t master_seed, std::uint64_t index) {
  return RandomEngine(derive_seed(master_seed, index));
}

}  // namespace spinclock
