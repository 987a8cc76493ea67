// Portable pseudo-random numbers.
//
// SplitMix64 in counter mode: the k-th output is mix(seed + k * golden).
// The standard library distributions are implementation-defined, so all
// sampling here goes through this generator and the helpers below to keep
// generated data identical across platforms and compilers.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace capmax {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Index drawn from a discrete distribution given by nonnegative weights
  // summing to `total`.
  std::size_t categorical(std::span<const double> weights, double total) {
    const double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      acc += weights[k];
      if (u < acc) return k;
    }
    // Rounding can leave u just above the accumulated total.
    for (std::size_t k = weights.size(); k-- > 0;)
      if (weights[k] > 0.0) return k;
    return 0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace capmax
