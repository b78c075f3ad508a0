// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace qot {

// Deterministic RNG wrapper. All sampling in the library goes through this so
// that a fixed seed yields bit-identical draws regardless of platform entropy.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform(double a = 0.0, double b = 1.0) {
    std::uniform_real_distribution<double> d(a, b);
    return d(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(engine_);
  }
  int integer(int lo, int hi) {  // inclusive bounds
    std::uniform_int_distribution<int> d(lo, hi);
    return d(engine_);
  }
  std::uint64_t raw() { return engine_(); }

  // Independent child stream; deterministic function of parent state and tag.
  Rng spawn(std::uint64_t tag) {
    return Rng(engine_() ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qot
