#pragma once

// Seeded generator used by the benchmarks and randomized tests. SplitMix64
// is fixed here (rather than a std:: engine plus distribution) because the
// standard distributions are not reproducible across library vendors.

#include <algorithm>
#include <cstdint>
#include <utility>

#include "olabuf/storage.hpp"

namespace olabuf {

class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by multiply-shift.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * bound) >> 64);
  }

  /// Uniform integer in [lo, hi].
  index_t between(index_t lo, index_t hi) {
    return lo + static_cast<index_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
  std::uint64_t state_;
};

/// Draws two uniform indices x, y in [0, n) and returns the half-open
/// interval [min, max) as an inclusive pair. Equal draws are redrawn, so the
/// result is never empty; n must be at least 2.
inline std::pair<index_t, index_t> sample_range(SplitMix64 &rng, index_t n) {
  for (;;) {
    const index_t x = rng.between(0, n - 1);
    const index_t y = rng.between(0, n - 1);
    if (x != y) {
      return {std::min(x, y), std::max(x, y) - 1};
    }
  }
}

} // namespace olabuf
