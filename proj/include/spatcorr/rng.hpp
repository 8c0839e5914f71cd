#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spatcorr {

namespace detail {
// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's public-domain constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Splittable key for deriving independent random streams. Folding a word into
/// a key yields a new key that depends only on (key, word), so the stream used
/// by replicate b is a pure function of (seed, b) regardless of scheduling.
class RngKey {
 public:
  explicit RngKey(std::uint64_t seed) : bits_(detail::mix64(seed + 0x9E3779B97F4A7C15ULL)) {}

  RngKey fold(std::uint64_t word) const {
    RngKey k(*this);
    k.bits_ = detail::mix64(k.bits_ + 0x9E3779B97F4A7C15ULL * (word + 1));
    return k;
  }

  std::uint64_t bits() const { return bits_; }

 private:
  RngKey() = default;
  std::uint64_t bits_ = 0;
};

/// Counter-based uniform stream (SplitMix64 sequence) with the handful of
/// variate transforms the samplers need. All transforms are implemented here
/// rather than via <random> distributions so that draws are identical across
/// standard libraries and across serial/parallel execution.
class RngStream {
 public:
  explicit RngStream(const RngKey& key) : state_(key.bits()) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    return detail::mix64(z);
  }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
  }

  /// Standard normal via Box-Muller; the paired variate is discarded so the
  /// stream position is a fixed two draws per normal.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential() { return -std::log(1.0 - uniform01()); }

  /// Poisson count by accumulating exponential arrivals; O(mean) draws.
  long poisson(double mean) {
    long k = 0;
    double s = exponential();
    while (s <= mean) {
      ++k;
      s += exponential();
    }
    return k;
  }

 private:
  std::uint64_t state_;
};

}  // namespace spatcorr
