#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace flround {

// One SplitMix64 step; used to derive well-separated seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Seed of substream `stream` of `master`. Chained calls give nested
// substreams, e.g. derive_seed(derive_seed(master, trial), scenario).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Index k with probability weights[k] / sum(weights). Falls back to the
  // last positive weight when rounding leaves the draw past the end.
  std::size_t pick(std::span<const double> weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace flround
