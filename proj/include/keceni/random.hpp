#pragma once

#include <cstdint>
#include <random>

namespace keceni {

using Rng = std::mt19937_64;

/// Named random streams. Each simulation component draws from its own stream so
/// it can be regenerated independently of the others.
enum class Stream : std::uint64_t {
  network = 1,
  covariates = 2,
  treatment = 3,
  outcome = 4,
  pseudo_outcome = 5,
  g_computation = 6,
  hajek = 7,
  replication = 8,
  oracle = 9,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based sub-seed: a pure function of (seed, stream, index), so
/// parallel tasks get the same draws regardless of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(stream)) ^ (index + 1));
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace keceni
