#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mocrisk {

using Rng = std::mt19937_64;

/// Mixes a base seed with stream coordinates (replicate, generation, ...)
/// into an independent 64-bit seed. Results depend only on the inputs, so
/// streams are reproducible regardless of how work is scheduled.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  return Rng{derive_seed(seed, stream)};
}

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace mocrisk
