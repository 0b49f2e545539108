#pragma once

#include <cstdint>
#include <random>

#include "calib/core/types.h"

namespace calib {

// Mixes two 64-bit values into a new seed (splitmix64 finalizer).
uint64_t HashCombine(uint64_t seed, uint64_t value);

// Deterministic RNG. All derived values are computed from the raw mt19937_64
// output stream with fixed arithmetic, so sequences are reproducible across
// platforms and runs for a given seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextUint64() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n).
  int UniformInt(int n) {
    return static_cast<int>(engine_() % static_cast<uint64_t>(n));
  }

  // Standard normal via Box-Muller.
  double Gaussian();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace calib
