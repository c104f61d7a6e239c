#pragma once

#include <cstdint>
#include <random>

namespace regseg {

// Stage tags used to derive independent streams from one user seed.
enum class Stage : std::uint64_t {
  Simulate = 1,
  Permute = 2,
  BallSeeding = 3,
  Decode = 4,
  Generic = 5,
};

// Deterministic seed derivation: splitmix64 over (seed, stage, replication).
std::uint64_t derive_seed(std::uint64_t seed, Stage stage, std::uint64_t replication = 0);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, Stage stage, std::uint64_t replication = 0) {
  return Rng(derive_seed(seed, stage, replication));
}

}  // namespace regseg
