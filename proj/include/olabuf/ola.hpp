#pragma once

// Overlapped Bin Buffering with Lagrange coefficients (OLA).
//
// Level 0 is the external array a. Level 1 is B_k = Σ_j c_j a_{j+kb} for
// k in [0, n/b]. Level L+1 is obtained from level L by the same weighted
// sum, for L = 1..β. All levels share one flat array of ⌊n/b⌋+1 reals:
// element k of level L sits at k b^(L-1). Level L+1 overwrites the level-L
// elements at multiples of b, which queries never need because the
// coefficients vanish at every nonzero multiple of b.
//
// For a query function f, zero outside [p, q],
//
//   Σ_i f(i) a_i = Σ_{L=0..β} Σ_k δ_L(k) X^L_k + Σ_m f(m b^(β+1)) X^(β+1)_m
//
// with δ_L(k) = f(k b^L) - Σ_m f(m b^(L+1)) c_{k - m b}. δ_L vanishes away
// from the two endpoints, so each level only costs O(N b) terms.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olabuf/error.hpp"
#include "olabuf/lagrange.hpp"
#include "olabuf/moments.hpp"
#include "olabuf/storage.hpp"

namespace olabuf {

namespace detail {

inline index_t floor_div(index_t x, index_t y) {
  index_t q = x / y;
  if ((x % y != 0) && ((x < 0) != (y < 0))) {
    --q;
  }
  return q;
}

inline index_t ceil_div_signed(index_t x, index_t y) { return -floor_div(-x, y); }

inline index_t pow_index(index_t b, int e) {
  index_t r = 1;
  for (int i = 0; i < e; ++i) {
    r *= b;
  }
  return r;
}

struct Interval {
  index_t lo;
  index_t hi; // inclusive

  friend bool operator==(const Interval &, const Interval &) = default;
};

} // namespace detail

/// Number of scales: the largest s with n / b^s >= N.
inline int ola_beta(index_t n, index_t b, int moments) {
  if (b < 2 || moments < 1) {
    throw parameter_error("ola_beta: need b >= 2 and N >= 1");
  }
  int s = 0;
  index_t p = 1; // b^s
  while (p <= n / b && p * b * moments <= n) {
    p *= b;
    ++s;
  }
  return s;
}

/// Flat OLA buffer holding levels 1..β+1 in place.
class OlaBuffer {
public:
  OlaBuffer(index_t n, index_t b, int moments, std::vector<double> components)
      : n_(n), b_(b), moments_(moments), beta_(checked_beta(n, b, moments)),
        table_(LagrangeTable::symmetric(b, moments)), components_(std::move(components)) {
    if (static_cast<index_t>(components_.size()) != component_count(n, b)) {
      throw parameter_error("OlaBuffer: expected " + std::to_string(component_count(n, b)) +
                            " components, got " + std::to_string(components_.size()));
    }
  }

  /// All-zero buffer, the starting point of incremental construction.
  static OlaBuffer zero(index_t n, index_t b, int moments) {
    return OlaBuffer(n, b, moments,
                     std::vector<double>(static_cast<std::size_t>(component_count(n, b)), 0.0));
  }

  static index_t component_count(index_t n, index_t b) { return n / b + 1; }

  index_t size() const { return n_; }
  index_t bin_size() const { return b_; }
  int moments() const { return moments_; }
  int beta() const { return beta_; }
  const LagrangeTable &table() const { return table_; }
  std::span<const double> components() const { return components_; }
  std::span<double> components() { return components_; }

  /// Elements at level L >= 1: ⌊n / b^L⌋ + 1.
  index_t level_count(int level) const { return n_ / detail::pow_index(b_, level) + 1; }

  /// Flat position of element k of level L >= 1.
  index_t position(int level, index_t k) const { return k * detail::pow_index(b_, level - 1); }

  double level_value(int level, index_t k) const {
    return components_[static_cast<std::size_t>(position(level, k))];
  }

  friend bool operator==(const OlaBuffer &x, const OlaBuffer &y) {
    return x.n_ == y.n_ && x.b_ == y.b_ && x.moments_ == y.moments_ &&
           x.components_ == y.components_;
  }

private:
  static int checked_beta(index_t n, index_t b, int moments) {
    if (b < 2) {
      throw parameter_error("OLA bin size must be at least 2");
    }
    if (moments < 2 || moments % 2 != 0) {
      throw parameter_error("OLA needs an even number of moments >= 2, got " +
                            std::to_string(moments));
    }
    const int beta = ola_beta(n, b, moments);
    if (beta < 1) {
      throw parameter_error("array of " + std::to_string(n) + " elements is too small for b=" +
                            std::to_string(b) + ", N=" + std::to_string(moments) +
                            " (need n >= N b)");
    }
    return beta;
  }

  index_t n_;
  index_t b_;
  int moments_;
  int beta_;
  LagrangeTable table_;
  std::vector<double> components_;
};

namespace detail {

template <class Get>
std::vector<double> onestep_impl(index_t len, Get &&get, int s, const LagrangeTable &table) {
  const index_t b = table.bin_size();
  const index_t stride = pow_index(b, s);
  const index_t out_len = len / (stride * b) + 1;
  std::vector<double> out(static_cast<std::size_t>(out_len), 0.0);
  const index_t count = len == 0 ? 0 : (len - 1) / stride + 1;
  for (index_t i = 0; i < count; ++i) {
    const double x = get(i * stride);
    const index_t t = i / b;
    const index_t r = i % b;
    if (r == 0) {
      out[static_cast<std::size_t>(t)] += x;
      continue;
    }
    for (int m = table.min_k(); m <= table.max_k(); ++m) {
      const index_t u = t + m;
      if (u >= 0 && u < out_len) {
        out[static_cast<std::size_t>(u)] += table(m, r) * x;
      }
    }
  }
  return out;
}

} // namespace detail

/// One coarsening pass over the elements src[i b^s]: output component u is
/// Σ_i c_{i - u b} src[i b^s]. Elements at multiples of b feed a single
/// component with weight 1. Output length is ⌊len / b^(s+1)⌋ + 1.
template <ReadableArray A>
std::vector<double> onestep(const A &src, int s, const LagrangeTable &table) {
  return detail::onestep_impl(
      src.size(), [&](index_t i) { return src.get(i); }, s, table);
}

inline std::vector<double> onestep(std::span<const double> src, int s, const LagrangeTable &table) {
  return detail::onestep_impl(
      static_cast<index_t>(src.size()), [&](index_t i) { return src[static_cast<std::size_t>(i)]; },
      s, table);
}

/// Builds the OLA buffer in one pass over a, then coarsens in place β times.
template <ReadableArray A>
OlaBuffer compute_buffer(const A &a, index_t b, int moments) {
  OlaBuffer buf = OlaBuffer::zero(a.size(), b, moments);
  const LagrangeTable &table = buf.table();
  std::vector<double> level = onestep(a, 0, table);
  auto comps = buf.components();
  std::copy(level.begin(), level.end(), comps.begin());
  const auto len = static_cast<index_t>(comps.size());
  for (int s = 0; s < buf.beta(); ++s) {
    const std::vector<double> next = onestep(std::span<const double>(comps), s, table);
    const index_t stride = detail::pow_index(b, s + 1);
    for (index_t k = 0; k < static_cast<index_t>(next.size()) && k * stride < len; ++k) {
      comps[static_cast<std::size_t>(k * stride)] = next[static_cast<std::size_t>(k)];
    }
  }
  return buf;
}

/// Indices of level s (0 = external array, valid indices [0, last]) where
/// δ_s may be nonzero for a query range [p, q]: N bins around ⌊p/b^(s+1)⌋
/// and N bins around ⌊q/b^(s+1)⌋, clamped and merged.
inline std::vector<detail::Interval> candidate_intervals(index_t last, int s, index_t p, index_t q,
                                                         index_t b, int moments) {
  const index_t scale = detail::pow_index(b, s + 1);
  const index_t half = moments / 2;
  auto window = [&](index_t e) {
    const index_t t = detail::floor_div(e, scale);
    return detail::Interval{std::max<index_t>((t - half) * b, 0),
                            std::min<index_t>((t + half) * b - 1, last)};
  };
  detail::Interval left = window(p);
  detail::Interval right = window(q);
  std::vector<detail::Interval> out;
  if (left.lo <= left.hi) {
    out.push_back(left);
  }
  if (right.lo <= right.hi) {
    if (!out.empty() && right.lo <= out.back().hi + 1) {
      out.back().lo = std::min(out.back().lo, right.lo);
      out.back().hi = std::max(out.back().hi, right.hi);
    } else {
      out.push_back(right);
    }
  }
  return out;
}

/// Expanded, sorted, duplicate-free form of candidate_intervals.
inline std::vector<index_t> candidates(index_t last, int s, index_t p, index_t q, index_t b,
                                       int moments) {
  std::vector<index_t> out;
  for (const auto &iv : candidate_intervals(last, s, p, q, b, moments)) {
    for (index_t i = iv.lo; i <= iv.hi; ++i) {
      out.push_back(i);
    }
  }
  return out;
}

/// h(i) = Σ_k f(k b) c_{i - k b}: the bin-wise Lagrange interpolant of f
/// through the nodes ⌊i/b⌋ - M' + 1 .. ⌊i/b⌋ + M.
inline double interpolant_h(const RangePolynomial &f, const LagrangeTable &table, index_t i) {
  const index_t b = table.bin_size();
  const index_t t = detail::floor_div(i, b);
  const index_t r = i - t * b;
  double h = 0.0;
  for (int k = table.min_k(); k <= table.max_k(); ++k) {
    const double fk = f((t + k) * b);
    if (fk != 0.0) {
      h += fk * table(k, r);
    }
  }
  return h;
}

/// δ(i) = f(i) - h(i).
inline double delta_correction(const RangePolynomial &f, const LagrangeTable &table, index_t i) {
  return f(i) - interpolant_h(f, table, i);
}

struct OlaQueryStats {
  std::uint64_t external_reads = 0;
  std::uint64_t buffer_reads = 0;
  /// δ evaluations across all levels.
  std::uint64_t delta_terms = 0;
};

namespace detail {

// δ_L(k) = f(k b^L) - Σ_m f(m b^(L+1)) c_{k - m b}.
inline double level_delta(const RangePolynomial &f, const LagrangeTable &table, int level,
                          index_t k) {
  const index_t b = table.bin_size();
  const index_t node_scale = pow_index(b, level);
  const index_t t = k / b;
  const index_t r = k % b;
  double h = 0.0;
  for (int m = table.min_k(); m <= table.max_k(); ++m) {
    const double fm = f((t + m) * node_scale * b);
    if (fm != 0.0) {
      h += fm * table(m, r);
    }
  }
  return f(k * node_scale) - h;
}

inline void check_query(const OlaBuffer &buf, index_t array_size, const RangePolynomial &f) {
  if (array_size != buf.size()) {
    throw parameter_error("array length " + std::to_string(array_size) +
                          " does not match buffer length " + std::to_string(buf.size()));
  }
  if (f.degree() > buf.moments() - 1) {
    throw parameter_error("query polynomial of degree " + std::to_string(f.degree()) +
                          " exceeds what a buffer with N=" + std::to_string(buf.moments()) +
                          " reproduces; rebuild with a larger N");
  }
  detail::check_range(f.lo(), f.hi(), buf.size(), "ola_query");
}

// Everything except the level-0 correction: levels 1..β and the top sweep.
inline double buffer_part(const OlaBuffer &buf, const RangePolynomial &f, OlaQueryStats *stats) {
  const LagrangeTable &table = buf.table();
  const index_t b = buf.bin_size();
  const auto comps = buf.components();
  double s = 0.0;
  for (int level = 1; level <= buf.beta(); ++level) {
    const index_t stride = pow_index(b, level - 1);
    for (const auto &iv :
         candidate_intervals(buf.level_count(level) - 1, level, f.lo(), f.hi(), b, buf.moments())) {
      for (index_t k = iv.lo; k <= iv.hi; ++k) {
        if (k % b == 0) {
          continue;
        }
        const double d = level_delta(f, table, level, k);
        if (stats != nullptr) {
          stats->delta_terms += 1;
        }
        if (d != 0.0) {
          s += d * comps[static_cast<std::size_t>(k * stride)];
          if (stats != nullptr) {
            stats->buffer_reads += 1;
          }
        }
      }
    }
  }
  const int top = buf.beta() + 1;
  const index_t node_scale = pow_index(b, top);
  const index_t stride = pow_index(b, top - 1);
  for (index_t m = 0; m < buf.level_count(top); ++m) {
    const double fm = f(m * node_scale);
    if (fm != 0.0) {
      s += fm * comps[static_cast<std::size_t>(m * stride)];
      if (stats != nullptr) {
        stats->buffer_reads += 1;
      }
    }
  }
  return s;
}

template <ReadableArray A>
double level0_part(const A &a, const OlaBuffer &buf, const RangePolynomial &f,
                   std::span<const Interval> ranges, OlaQueryStats *stats) {
  const LagrangeTable &table = buf.table();
  const index_t b = buf.bin_size();
  double s = 0.0;
  for (const auto &iv : ranges) {
    for (index_t i = iv.lo; i <= iv.hi; ++i) {
      if (i % b == 0) {
        continue;
      }
      const double d = level_delta(f, table, 0, i);
      if (stats != nullptr) {
        stats->delta_terms += 1;
      }
      if (d != 0.0) {
        s += d * a.get(i);
        if (stats != nullptr) {
          stats->external_reads += 1;
        }
      }
    }
  }
  return s;
}

} // namespace detail

/// Σ_i f(i) a_i using the buffer plus external reads confined to two windows
/// of N b elements around the endpoints of f.
template <ReadableArray A>
double ola_query(const A &a, const OlaBuffer &buf, const RangePolynomial &f,
                 OlaQueryStats *stats = nullptr) {
  detail::check_query(buf, a.size(), f);
  const auto ranges =
      candidate_intervals(buf.size() - 1, 0, f.lo(), f.hi(), buf.bin_size(), buf.moments());
  return detail::level0_part(a, buf, f, ranges, stats) + detail::buffer_part(buf, f, stats);
}

struct OlaUpdateStats {
  /// Live DeltaMap keys at the start of each level's processing (levels 0..β).
  std::vector<std::size_t> keys_per_level;
  /// Buffer cells written.
  std::uint64_t cells_modified = 0;
};

/// Propagates a change Δ of a_j through every level. The DeltaMap is keyed
/// by level-0 index (element k of level L has key k b^L). An entry is
/// processed at its largest level, i.e. once ⌊key / b^L⌋ is not a multiple
/// of b; until then it rides up unchanged because c_0 = 1.
inline void ola_update(OlaBuffer &buf, index_t j, double delta, OlaUpdateStats *stats = nullptr) {
  detail::check_index(j, buf.size(), "ola_update");
  if (delta == 0.0) {
    return;
  }
  const LagrangeTable &table = buf.table();
  const index_t b = buf.bin_size();
  auto comps = buf.components();
  std::map<index_t, double> deltas;
  deltas[j] = delta;
  std::vector<index_t> keys;
  for (int s = 0; s <= buf.beta(); ++s) {
    keys.clear();
    for (const auto &kv : deltas) {
      keys.push_back(kv.first);
    }
    if (stats != nullptr) {
      stats->keys_per_level.push_back(keys.size());
    }
    const index_t scale = detail::pow_index(b, s);
    const index_t next_count = buf.level_count(s + 1);
    for (index_t key : keys) {
      const index_t k = key / scale;
      if (k % b == 0) {
        continue;
      }
      const double d = deltas[key];
      const index_t t = k / b;
      const index_t r = k % b;
      for (int m = table.min_k(); m <= table.max_k(); ++m) {
        const index_t u = t + m;
        if (u >= 0 && u < next_count) {
          deltas[u * scale * b] += table(m, r) * d;
        }
      }
      if (s >= 1) {
        comps[static_cast<std::size_t>(key / b)] += d;
        if (stats != nullptr) {
          stats->cells_modified += 1;
        }
      }
      deltas.erase(key);
    }
  }
  for (const auto &[key, d] : deltas) {
    comps[static_cast<std::size_t>(key / b)] += d;
    if (stats != nullptr) {
      stats->cells_modified += 1;
    }
  }
}

/// Bins [lo, hi] where δ can be nonzero around one endpoint of f.
struct EndpointWindow {
  index_t lo;
  index_t hi;

  index_t center() const { return lo + (hi - lo) / 2; }
  index_t width() const { return hi - lo + 1; }
};

/// Exact δ support windows (in bins) for the lower and upper edge of f,
/// N-1 bins each when M = M' = N/2.
inline std::pair<EndpointWindow, EndpointWindow> endpoint_windows(const RangePolynomial &f,
                                                                  const LagrangeTable &table) {
  if (table.left_overlap() < 1 || table.right_overlap() < 1) {
    throw parameter_error("endpoint windows need M >= 1 and M' >= 1");
  }
  const index_t b = table.bin_size();
  const index_t m = table.left_overlap();
  const index_t mp = table.right_overlap();
  const index_t p = f.lo();
  const index_t q1 = f.hi() + 1;
  EndpointWindow lower{detail::ceil_div_signed(p, b) - m, detail::floor_div(p - 1, b) + mp - 1};
  EndpointWindow upper{detail::ceil_div_signed(q1, b) - m, detail::floor_div(q1 - 1, b) + mp - 1};
  return {lower, upper};
}

/// The first `count` bins of the window ordered by distance from its middle
/// bin, ties going left.
inline std::vector<index_t> centered_bins(const EndpointWindow &w, int count) {
  std::vector<index_t> out;
  const index_t c = w.center();
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (index_t d = 0; static_cast<int>(out.size()) < count && d <= w.width(); ++d) {
    for (index_t t : {c - d, c + d}) {
      if (static_cast<int>(out.size()) < count && t >= w.lo && t <= w.hi &&
          std::find(out.begin(), out.end(), t) == out.end()) {
        out.push_back(t);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ApproxResult {
  double value = 0.0;
  std::uint64_t external_reads = 0;
};

/// Progressive estimate: the buffer-only answer plus the level-0 correction
/// restricted to `bins_per_endpoint` bins centered in each endpoint window.
/// With N-1 bins it equals ola_query.
template <ReadableArray A>
ApproxResult approx_query(const A &a, const OlaBuffer &buf, const RangePolynomial &f,
                          int bins_per_endpoint) {
  detail::check_query(buf, a.size(), f);
  if (bins_per_endpoint < 0 || bins_per_endpoint > buf.moments() - 1) {
    throw parameter_error("bins_per_endpoint must lie in [0, N-1]");
  }
  const index_t b = buf.bin_size();
  const auto [lower, upper] = endpoint_windows(f, buf.table());
  std::vector<index_t> bins = centered_bins(lower, bins_per_endpoint);
  for (index_t t : centered_bins(upper, bins_per_endpoint)) {
    bins.push_back(t);
  }
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  std::vector<detail::Interval> ranges;
  for (index_t t : bins) {
    const index_t lo = std::max<index_t>(t * b, 0);
    const index_t hi = std::min<index_t>(t * b + b - 1, buf.size() - 1);
    if (lo <= hi) {
      ranges.push_back({lo, hi});
    }
  }
  OlaQueryStats stats;
  const double value = detail::level0_part(a, buf, f, ranges, &stats) +
                       detail::buffer_part(buf, f, nullptr);
  return {value, stats.external_reads};
}

struct BinMass {
  index_t bin;
  double mass;
};

/// Σ_{i in bin} |f(i) - h(i)| for every bin of the lower and upper endpoint
/// windows.
struct ErrorMassProfile {
  EndpointWindow lower_window;
  EndpointWindow upper_window;
  std::vector<BinMass> lower;
  std::vector<BinMass> upper;

  static double total(const std::vector<BinMass> &side) {
    double s = 0.0;
    for (const auto &m : side) {
      s += m.mass;
    }
    return s;
  }

  /// Share of one side's mass held by the `count` centered bins.
  static double centered_fraction(const std::vector<BinMass> &side, const EndpointWindow &w,
                                  int count) {
    const double tot = total(side);
    if (tot == 0.0) {
      return 1.0;
    }
    const auto keep = centered_bins(w, count);
    double s = 0.0;
    for (const auto &m : side) {
      if (std::find(keep.begin(), keep.end(), m.bin) != keep.end()) {
        s += m.mass;
      }
    }
    return s / tot;
  }
};

inline ErrorMassProfile error_mass_profile(const LagrangeTable &table, const RangePolynomial &f) {
  const index_t b = table.bin_size();
  const auto [lower, upper] = endpoint_windows(f, table);
  auto side = [&](const EndpointWindow &w) {
    std::vector<BinMass> out;
    for (index_t t = w.lo; t <= w.hi; ++t) {
      double mass = 0.0;
      for (index_t r = 0; r < b; ++r) {
        mass += std::abs(delta_correction(f, table, t * b + r));
      }
      out.push_back({t, mass});
    }
    return out;
  };
  return {lower, upper, side(lower), side(upper)};
}

} // namespace olabuf
