#pragma once

// Algebraic query framework: moment tuples, their merge (F) and singleton
// (G) operations, range polynomials, and the brute-force oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "olabuf/error.hpp"
#include "olabuf/storage.hpp"

namespace olabuf {

/// Largest moment order for which binomial coefficients are cached.
inline constexpr int max_moment_order = 32;

namespace detail {

struct PascalTriangle {
  std::array<std::array<double, max_moment_order + 1>, max_moment_order + 1> c{};
  constexpr PascalTriangle() {
    for (int k = 0; k <= max_moment_order; ++k) {
      c[k][0] = 1.0;
      for (int j = 1; j <= k; ++j) {
        c[k][j] = c[k - 1][j - 1] + (j < k ? c[k - 1][j] : 0.0);
      }
    }
  }
};

inline constexpr PascalTriangle pascal{};

} // namespace detail

/// C(k, j) for 0 <= j <= k <= max_moment_order.
constexpr double binomial(int k, int j) { return detail::pascal.c[k][j]; }

/// Tuple (COUNT, Σ a_i, Σ (i-anchor) a_i, ..., Σ (i-anchor)^(m-2) a_i) over a
/// contiguous range starting at `anchor`. An empty range is all zeros.
class MomentTuple {
public:
  MomentTuple() = default;

  MomentTuple(index_t anchor, std::vector<double> values)
      : anchor_(anchor), values_(std::move(values)) {}

  /// All-zero tuple with m components.
  static MomentTuple empty(int m, index_t anchor = 0) {
    return MomentTuple(anchor, std::vector<double>(static_cast<std::size_t>(m), 0.0));
  }

  int order_count() const { return static_cast<int>(values_.size()); }
  index_t anchor() const { return anchor_; }
  double count() const { return values_.empty() ? 0.0 : values_[0]; }
  bool is_empty() const { return count() == 0.0; }

  /// Σ (i - anchor)^k a_i over the range; k = 0 is the plain sum.
  double moment(int k) const { return values_[static_cast<std::size_t>(k) + 1]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double &operator[](std::size_t i) { return values_[i]; }

  friend bool operator==(const MomentTuple &, const MomentTuple &) = default;

private:
  index_t anchor_ = 0;
  std::vector<double> values_;
};

namespace detail {

inline void check_arity(int m) {
  if (m < 2 || m > max_moment_order + 2) {
    throw parameter_error("moment tuple arity " + std::to_string(m) + " outside [2, " +
                          std::to_string(max_moment_order + 2) + "]");
  }
}

} // namespace detail

/// G applied to a single element: (1, value, 0, ..., 0) anchored at position.
inline MomentTuple g_singleton(double value, index_t position, int m) {
  detail::check_arity(m);
  std::vector<double> v{1.0, value};
  v.resize(static_cast<std::size_t>(m), 0.0);
  return MomentTuple(position, std::move(v));
}

/// Moments of t taken about new_anchor instead of t.anchor(), by binomial
/// expansion of ((i - p) + (p - c))^k.
inline MomentTuple recenter(const MomentTuple &t, index_t new_anchor) {
  const int m = t.order_count();
  if (new_anchor == t.anchor() || m == 0) {
    return MomentTuple(new_anchor, std::vector<double>(t.values().begin(), t.values().end()));
  }
  if (m > max_moment_order + 2) {
    throw parameter_error("moment order exceeds the cached binomial table");
  }
  const double d = static_cast<double>(t.anchor() - new_anchor);
  std::array<double, max_moment_order + 1> pow_d{};
  pow_d[0] = 1.0;
  for (int k = 1; k <= m - 2; ++k) {
    pow_d[k] = pow_d[k - 1] * d;
  }
  MomentTuple out = MomentTuple::empty(m, new_anchor);
  out[0] = t[0];
  for (int k = 0; k <= m - 2; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
      acc += binomial(k, j) * pow_d[k - j] * t.moment(j);
    }
    out[static_cast<std::size_t>(k) + 1] = acc;
  }
  return out;
}

/// F for moment tuples: combines a range with the range to its right. The
/// result is anchored at left.anchor(). Empty tuples are identities on both
/// sides.
inline MomentTuple f_merge(const MomentTuple &left, const MomentTuple &right) {
  if (left.order_count() != right.order_count()) {
    throw parameter_error("f_merge: arity mismatch (" + std::to_string(left.order_count()) +
                          " vs " + std::to_string(right.order_count()) + ")");
  }
  if (left.is_empty()) {
    return right;
  }
  if (right.is_empty()) {
    return left;
  }
  MomentTuple out = recenter(right, left.anchor());
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    out[i] += left[i];
  }
  return out;
}

/// Solves z = f_merge(x, y) for x, where x is the left part of z.
inline MomentTuple f_invert(const MomentTuple &z, const MomentTuple &y) {
  if (z.order_count() != y.order_count()) {
    throw parameter_error("f_invert: arity mismatch");
  }
  if (y.is_empty()) {
    return z;
  }
  MomentTuple shifted = recenter(y, z.anchor());
  MomentTuple out = z;
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    out[i] -= shifted[i];
  }
  return out;
}

/// Query function f: a polynomial on [lo, hi] written in powers of (i - lo),
/// and exactly zero outside [lo, hi].
class RangePolynomial {
public:
  RangePolynomial(index_t lo, index_t hi, std::vector<double> coeffs)
      : lo_(lo), hi_(hi), coeffs_(std::move(coeffs)) {
    if (hi < lo) {
      throw parameter_error("RangePolynomial: hi < lo");
    }
  }

  /// Indicator of [lo, hi]; the range-sum query.
  static RangePolynomial range_sum(index_t lo, index_t hi) { return {lo, hi, {1.0}}; }

  /// (i - lo)^k on [lo, hi]; the query moment of order k.
  static RangePolynomial moment(index_t lo, index_t hi, int k) {
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    c.back() = 1.0;
    return {lo, hi, std::move(c)};
  }

  index_t lo() const { return lo_; }
  index_t hi() const { return hi_; }
  std::span<const double> coeffs() const { return coeffs_; }

  /// Polynomial degree; -1 for the zero polynomial.
  int degree() const {
    int d = static_cast<int>(coeffs_.size()) - 1;
    while (d >= 0 && coeffs_[static_cast<std::size_t>(d)] == 0.0) {
      --d;
    }
    return d;
  }

  bool contains(index_t i) const { return i >= lo_ && i <= hi_; }

  double operator()(index_t i) const {
    if (!contains(i)) {
      return 0.0;
    }
    const double x = static_cast<double>(i - lo_);
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * x + *it;
    }
    return acc;
  }

private:
  index_t lo_;
  index_t hi_;
  std::vector<double> coeffs_;
};

enum class QueryTag { sum, max, moments };

/// Runtime description of an algebraic query (Q, G, F).
struct QueryKind {
  QueryTag tag = QueryTag::sum;
  /// Number of buffered moments N for QueryTag::moments (tuple arity N+1).
  int moments = 0;

  static constexpr QueryKind sum() { return {QueryTag::sum, 0}; }
  static constexpr QueryKind max() { return {QueryTag::max, 0}; }
  static constexpr QueryKind moments_of(int n) { return {QueryTag::moments, n}; }

  constexpr bool linear() const { return tag != QueryTag::max; }
  constexpr bool invertible() const { return tag != QueryTag::max; }

  friend constexpr bool operator==(QueryKind, QueryKind) = default;
};

/// O(n) oracle: Σ_{i=lo}^{hi} f(i) a_i.
template <ReadableArray A>
double brute_query(const A &a, const RangePolynomial &f) {
  detail::check_range(f.lo(), f.hi(), a.size(), "brute_query");
  double s = 0.0;
  for (index_t i = f.lo(); i <= f.hi(); ++i) {
    s += f(i) * a.get(i);
  }
  return s;
}

/// Σ |f(i) a_i|, the scale used for relative tolerances against brute_query.
template <ReadableArray A>
double brute_query_magnitude(const A &a, const RangePolynomial &f) {
  detail::check_range(f.lo(), f.hi(), a.size(), "brute_query_magnitude");
  double s = 0.0;
  for (index_t i = f.lo(); i <= f.hi(); ++i) {
    s += std::abs(f(i) * a.get(i));
  }
  return s;
}

template <ReadableArray A>
double brute_max(const A &a, index_t lo, index_t hi) {
  detail::check_range(lo, hi, a.size(), "brute_max");
  double best = a.get(lo);
  for (index_t i = lo + 1; i <= hi; ++i) {
    best = std::max(best, a.get(i));
  }
  return best;
}

/// Direct evaluation of the moment tuple of a[lo..hi] about lo.
template <ReadableArray A>
MomentTuple brute_moments(const A &a, index_t lo, index_t hi, int m) {
  detail::check_arity(m);
  detail::check_range(lo, hi, a.size(), "brute_moments");
  MomentTuple t = MomentTuple::empty(m, lo);
  t[0] = static_cast<double>(hi - lo + 1);
  for (index_t i = lo; i <= hi; ++i) {
    const double v = a.get(i);
    double p = 1.0;
    for (int k = 0; k <= m - 2; ++k) {
      t[static_cast<std::size_t>(k) + 1] += p * v;
      p *= static_cast<double>(i - lo);
    }
  }
  return t;
}

} // namespace olabuf
