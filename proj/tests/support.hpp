#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "olabuf/random.hpp"
#include "olabuf/storage.hpp"

namespace olabuf::testing {

/// |x - y| <= max(1e-9 * scale, 1e-12), the suite-wide comparison rule.
inline bool close(double x, double y, double scale) {
  return std::abs(x - y) <= std::max(1e-9 * scale, 1e-12);
}

inline MemoryArray random_array(SplitMix64 &rng, index_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto &x : v) {
    x = rng.uniform(lo, hi);
  }
  return MemoryArray(std::move(v));
}

inline std::vector<double> random_coeffs(SplitMix64 &rng, int degree) {
  std::vector<double> c(static_cast<std::size_t>(degree) + 1);
  for (auto &x : c) {
    x = rng.uniform(-1.0, 1.0);
  }
  return c;
}

} // namespace olabuf::testing
