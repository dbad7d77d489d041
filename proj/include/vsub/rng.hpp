#pragma once

// Counter-based deterministic random source (SplitMix64 in counter mode).
// The i-th output is mix64(seed + i * 0x9E3779B97F4A7C15) with the standard
// SplitMix64 finalizer; doubles take the top 53 bits.  The generator is
// fully specified here and in the README so seeds reproduce across
// implementations and platforms.

#include <cmath>
#include <cstdint>

namespace vsub {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Standard normal via Box-Muller (consumes two uniforms).
  double normal() {
    double u1 = next_double(), u2 = next_double();
    while (u1 == 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace vsub
