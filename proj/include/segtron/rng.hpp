#pragma once

#include <cstdint>
#include <random>

namespace segtron {

// Uniform double in [0,1) straight from the engine output; stable across
// standard-library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

// Deterministic sub-stream derivation (seed, stream tag) -> engine.
inline std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream};
  return std::mt19937_64(seq);
}

}  // namespace segtron
