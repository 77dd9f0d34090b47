#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace uekit {

// SplitMix64 finalizer; used for seed derivation and hashing seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed for sub-task `index` of a run seeded with
// `seed`: splitmix64(seed + 0x9E3779B97F4A7C15 * (index + 1)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Deterministic random stream. The engine (mt19937_64) is fully specified by
// the standard; the distributions below are implemented here because the
// standard library's distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Uniform integer in [lo, hi] inclusive.
  int range(int lo, int hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (one draw per call, no caching).
  double normal();

  // Index drawn with probability proportional to weights.
  std::size_t categorical(const std::vector<double>& weights);

  // Fisher-Yates permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace uekit
