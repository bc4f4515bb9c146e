#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olabuf/error.hpp"
#include "olabuf/storage.hpp"

namespace olabuf {

/// Lagrange weights c_j for j in [-M b, M' b), tabulated as c_{r - k b} for
/// r in [0, b) and k in [-M'+1, M]. For a sample position i = t b + r the
/// interpolant through the nodes (t+k) b reproduces every polynomial of
/// degree < M + M'.
class LagrangeTable {
public:
  LagrangeTable(index_t b, int left_overlap, int right_overlap)
      : b_(b), m_(left_overlap), mp_(right_overlap) {
    if (b < 2) {
      throw parameter_error("LagrangeTable: bin size must be at least 2");
    }
    if (left_overlap < 0 || right_overlap < 0 || left_overlap + right_overlap < 1) {
      throw parameter_error("LagrangeTable: overlaps must be non-negative with M + M' >= 1");
    }
    const int nodes = m_ + mp_;
    c_.resize(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(b_));
    for (int k = min_k(); k <= max_k(); ++k) {
      // (M-k)! (k+M'-1)! up to sign: the product of (k - m) over the other nodes.
      double denom = factorial(m_ - k) * factorial(k + mp_ - 1);
      if ((m_ - k) % 2 != 0) {
        denom = -denom;
      }
      for (index_t r = 0; r < b_; ++r) {
        const double x = static_cast<double>(r) / static_cast<double>(b_);
        double num = 1.0;
        for (int m = min_k(); m <= max_k(); ++m) {
          if (m != k) {
            num *= x - m;
          }
        }
        c_[slot(k, r)] = r == 0 ? (k == 0 ? 1.0 : 0.0) : num / denom;
      }
    }
  }

  /// Symmetric table M = M' = N/2 used by OLA buffers.
  static LagrangeTable symmetric(index_t b, int moments) {
    if (moments < 2 || moments % 2 != 0) {
      throw parameter_error("OLA needs an even number of moments >= 2, got " +
                            std::to_string(moments));
    }
    return LagrangeTable(b, moments / 2, moments / 2);
  }

  index_t bin_size() const { return b_; }
  int left_overlap() const { return m_; }
  int right_overlap() const { return mp_; }
  /// Number of nodes M + M'; the table reproduces degree < nodes().
  int nodes() const { return m_ + mp_; }
  int min_k() const { return -mp_ + 1; }
  int max_k() const { return m_; }

  /// c_{r - k b}.
  double operator()(int k, index_t r) const { return c_[slot(k, r)]; }

  /// c_j, zero outside [-M b, M' b).
  double at(index_t j) const {
    if (j < -static_cast<index_t>(m_) * b_ || j >= static_cast<index_t>(mp_) * b_) {
      return 0.0;
    }
    index_t r = j % b_;
    if (r < 0) {
      r += b_;
    }
    const auto k = static_cast<int>(-(j - r) / b_);
    return (*this)(k, r);
  }

private:
  static double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) {
      f *= i;
    }
    return f;
  }

  std::size_t slot(int k, index_t r) const {
    return static_cast<std::size_t>(k - min_k()) * static_cast<std::size_t>(b_) +
           static_cast<std::size_t>(r);
  }

  index_t b_;
  int m_;
  int mp_;
  std::vector<double> c_;
};

} // namespace olabuf
