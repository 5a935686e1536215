#pragma once

// Counter-mode SplitMix64. Every draw is a pure function of (key, counter), so
// a stream can be replayed from (seed, stream) alone and two distinct streams
// never share state. This is what makes partitioned Monte-Carlo runs
// reproducible: workers get their own stream, nobody advances anyone else's.

#include <cmath>
#include <cstdint>

namespace pbfa {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// Finalizer from the SplitMix64 generator (variant 13 of the murmur-style
// avalanche mixers).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed + kGoldenGamma) ^
                   mix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() {
    counter_ += kGoldenGamma;
    return mix64(key_ + counter_);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double q) { return next_unit() < q; }

  // Box-Muller; the second value of each pair is served on the next call.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = next_unit();
    } while (u1 <= 0.0);
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.28318530717958647692528676655900577;
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pbfa
