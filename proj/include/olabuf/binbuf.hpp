#pragma once

// Bin Buffering and Hierarchical Bin Buffering for algebraic queries.
//
// A buffer holds G over consecutive bins of b elements. Queries aggregate a
// head fragment read from the array, whole-bin components, and a tail
// fragment. The hierarchical buffer aggregates b consecutive components
// again at each scale; for invertible queries the scale-(s+1) value of a
// group is written over the scale-s value at the group's first slot, so the
// whole hierarchy fits in ceil(n/b) slots.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "olabuf/error.hpp"
#include "olabuf/moments.hpp"
#include "olabuf/storage.hpp"

namespace olabuf {

/// SUM: distributive, linear, invertible.
struct SumAggregate {
  using value_type = double;

  QueryKind kind() const { return QueryKind::sum(); }
  double identity() const { return 0.0; }
  double singleton(double v, index_t) const { return v; }
  double merge(double x, double y) const { return x + y; }
  double invert(double z, double y) const { return z - y; }
  void apply_delta(double &v, index_t, double delta) const { v += delta; }
};

/// MAX: distributive, neither linear nor invertible.
struct MaxAggregate {
  using value_type = double;

  QueryKind kind() const { return QueryKind::max(); }
  double identity() const { return -std::numeric_limits<double>::infinity(); }
  double singleton(double v, index_t) const { return v; }
  double merge(double x, double y) const { return x < y ? y : x; }
};

/// Local moments of order < N as (COUNT, SUM, ..., moment of order N-1).
struct MomentAggregate {
  using value_type = MomentTuple;

  explicit MomentAggregate(int moments) : moments_(moments) {
    if (moments < 1) {
      throw parameter_error("MomentAggregate: need at least one moment");
    }
    detail::check_arity(moments + 1);
  }

  QueryKind kind() const { return QueryKind::moments_of(moments_); }
  int arity() const { return moments_ + 1; }
  MomentTuple identity() const { return MomentTuple::empty(arity()); }
  MomentTuple singleton(double v, index_t pos) const { return g_singleton(v, pos, arity()); }
  MomentTuple merge(const MomentTuple &x, const MomentTuple &y) const { return f_merge(x, y); }
  MomentTuple invert(const MomentTuple &z, const MomentTuple &y) const { return f_invert(z, y); }

  /// Adds delta * G(e^(pos - anchor)) to the moment components; COUNT is
  /// unaffected by a change of value.
  void apply_delta(MomentTuple &v, index_t pos, double delta) const {
    const double x = static_cast<double>(pos - v.anchor());
    double p = delta;
    for (int k = 0; k < moments_; ++k) {
      v[static_cast<std::size_t>(k) + 1] += p;
      p *= x;
    }
  }

private:
  int moments_;
};

template <class Agg>
concept Aggregate = requires(const Agg &g, typename Agg::value_type x, double v, index_t i) {
  { g.kind() } -> std::same_as<QueryKind>;
  { g.identity() } -> std::convertible_to<typename Agg::value_type>;
  { g.singleton(v, i) } -> std::convertible_to<typename Agg::value_type>;
  { g.merge(x, x) } -> std::convertible_to<typename Agg::value_type>;
};

template <class Agg>
concept InvertibleAggregate = Aggregate<Agg> && requires(const Agg &g, typename Agg::value_type x) {
  { g.invert(x, x) } -> std::convertible_to<typename Agg::value_type>;
};

template <class Agg>
concept LinearAggregate =
    Aggregate<Agg> && requires(const Agg &g, typename Agg::value_type &x, index_t i, double d) {
      g.apply_delta(x, i, d);
    };

/// Instrumentation filled in by bin-buffer queries.
struct QueryStats {
  /// Operands of the final F: one per buffer component plus one per
  /// non-empty raw-element fragment.
  std::uint64_t terms = 0;
  /// Raw array elements folded into fragments.
  std::uint64_t element_reads = 0;
  /// Buffer slots read, including reads made while recovering overwritten
  /// in-place values.
  std::uint64_t slot_reads = 0;
  /// Overwritten slots reconstructed through the inverse of F.
  std::uint64_t recoveries = 0;
};

/// Slots written by an update.
struct UpdateStats {
  std::vector<index_t> modified_slots;
  std::uint64_t element_reads = 0;
};

namespace detail {

inline index_t ceil_div(index_t x, index_t y) { return (x + y - 1) / y; }

inline index_t ipow(index_t base, int e) {
  index_t r = 1;
  for (int i = 0; i < e; ++i) {
    r *= base;
  }
  return r;
}

template <Aggregate Agg, ReadableArray A>
typename Agg::value_type fold_elements(const Agg &agg, const A &a, index_t lo, index_t hi,
                                       QueryStats *stats) {
  auto acc = agg.identity();
  for (index_t i = lo; i <= hi; ++i) {
    acc = agg.merge(acc, agg.singleton(a.get(i), i));
  }
  if (stats != nullptr && lo <= hi) {
    stats->terms += 1;
    stats->element_reads += static_cast<std::uint64_t>(hi - lo + 1);
  }
  return acc;
}

inline void check_bin_size(index_t b) {
  if (b < 2) {
    throw parameter_error("bin size must be at least 2, got " + std::to_string(b));
  }
}

} // namespace detail

/// One-scale Bin Buffer: components[k] = G(a_{kb}, ..., a_{kb+b-1}). When b
/// does not divide n the last bin is short.
template <Aggregate Agg>
class BinBuffer {
public:
  using value_type = typename Agg::value_type;

  template <ReadableArray A>
  static BinBuffer build(const A &a, Agg agg, index_t b) {
    detail::check_bin_size(b);
    BinBuffer buf(std::move(agg), a.size(), b);
    const index_t bins = detail::ceil_div(buf.n_, b);
    buf.components_.reserve(static_cast<std::size_t>(bins));
    for (index_t k = 0; k < bins; ++k) {
      buf.components_.push_back(
          detail::fold_elements(buf.agg_, a, k * b, std::min(buf.n_, (k + 1) * b) - 1, nullptr));
    }
    return buf;
  }

  index_t size() const { return n_; }
  index_t bin_size() const { return b_; }
  QueryKind kind() const { return agg_.kind(); }
  const Agg &aggregate() const { return agg_; }
  const std::vector<value_type> &components() const { return components_; }

  /// G(a_k, ..., a_l) from a head fragment, whole bins, and a tail fragment.
  template <ReadableArray A>
  value_type query(const A &a, index_t k, index_t l, QueryStats *stats = nullptr) const {
    detail::check_range(k, l, n_, "BinBuffer::query");
    const index_t first = detail::ceil_div(k, b_);
    const index_t last = (l == n_ - 1) ? static_cast<index_t>(components_.size()) - 1
                                       : (l + 1) / b_ - 1;
    if (first > last) {
      return detail::fold_elements(agg_, a, k, l, stats);
    }
    auto acc = detail::fold_elements(agg_, a, k, first * b_ - 1, stats);
    for (index_t u = first; u <= last; ++u) {
      acc = agg_.merge(acc, components_[static_cast<std::size_t>(u)]);
    }
    if (stats != nullptr) {
      stats->terms += static_cast<std::uint64_t>(last - first + 1);
      stats->slot_reads += static_cast<std::uint64_t>(last - first + 1);
    }
    const index_t tail_lo = std::min(n_, (last + 1) * b_);
    return agg_.merge(acc, detail::fold_elements(agg_, a, tail_lo, l, stats));
  }

  /// Adds delta to a_j and refreshes the buffer. Linear kinds touch one
  /// component without reading the bin; MAX re-aggregates the bin.
  template <WritableArray A>
  void update(A &a, index_t j, double delta, UpdateStats *stats = nullptr) {
    detail::check_index(j, n_, "BinBuffer::update");
    a.set(j, a.get(j) + delta);
    if (stats != nullptr) {
      stats->element_reads += 1;
    }
    if (delta == 0.0) {
      return;
    }
    const index_t k = j / b_;
    auto &slot = components_[static_cast<std::size_t>(k)];
    if constexpr (LinearAggregate<Agg>) {
      agg_.apply_delta(slot, j, delta);
    } else {
      slot = detail::fold_elements(agg_, a, k * b_, std::min(n_, (k + 1) * b_) - 1, nullptr);
      if (stats != nullptr) {
        stats->element_reads += static_cast<std::uint64_t>(std::min(n_, (k + 1) * b_) - k * b_);
      }
    }
    if (stats != nullptr) {
      stats->modified_slots.push_back(k);
    }
  }

private:
  BinBuffer(Agg agg, index_t n, index_t b) : agg_(std::move(agg)), n_(n), b_(b) {}

  Agg agg_;
  index_t n_;
  index_t b_;
  std::vector<value_type> components_;
};

/// Default number of scales: the largest s with n / b^s >= 2, at least 1.
inline int default_hier_scales(index_t n, index_t b) {
  int s = 1;
  index_t p = b; // b^s
  while (p <= n / b && 2 * p * b <= n) {
    p *= b;
    ++s;
  }
  return s;
}

/// Multi-scale Bin Buffer. Scale s has ceil(n/b^s) units; unit u of scale s
/// aggregates a[u b^s, (u+1) b^s). Invertible kinds keep every scale in one
/// array of ceil(n/b) slots: slot i holds the value of the largest scale s
/// with b^(s-1) | i. Other kinds keep one array per scale.
template <Aggregate Agg>
class HierarchicalBinBuffer {
public:
  using value_type = typename Agg::value_type;
  static constexpr bool in_place = InvertibleAggregate<Agg>;

  template <ReadableArray A>
  static HierarchicalBinBuffer build(const A &a, Agg agg, index_t b,
                                     std::optional<int> scales = std::nullopt) {
    detail::check_bin_size(b);
    const index_t n = a.size();
    const int top = scales.value_or(default_hier_scales(n, b));
    if (top < 1) {
      throw parameter_error("hierarchical bin buffer needs at least one scale");
    }
    HierarchicalBinBuffer buf(std::move(agg), n, b, top);
    auto base = BinBuffer<Agg>::build(a, buf.agg_, b).components();
    if constexpr (in_place) {
      buf.slots_ = std::move(base);
      for (int s = 1; s < top; ++s) {
        const index_t units = buf.unit_count(s);
        const index_t stride = detail::ipow(b, s - 1);
        for (index_t g = 0; g * b < units; ++g) {
          auto acc = buf.agg_.identity();
          for (index_t u = g * b; u < std::min(units, (g + 1) * b); ++u) {
            acc = buf.agg_.merge(acc, buf.slots_[static_cast<std::size_t>(u * stride)]);
          }
          buf.slots_[static_cast<std::size_t>(g * b * stride)] = std::move(acc);
        }
      }
    } else {
      buf.levels_.push_back(std::move(base));
      for (int s = 1; s < top; ++s) {
        const auto &prev = buf.levels_.back();
        std::vector<value_type> next;
        const index_t units = static_cast<index_t>(prev.size());
        for (index_t g = 0; g * b < units; ++g) {
          auto acc = buf.agg_.identity();
          for (index_t u = g * b; u < std::min(units, (g + 1) * b); ++u) {
            acc = buf.agg_.merge(acc, prev[static_cast<std::size_t>(u)]);
          }
          next.push_back(std::move(acc));
        }
        buf.levels_.push_back(std::move(next));
      }
    }
    return buf;
  }

  index_t size() const { return n_; }
  index_t bin_size() const { return b_; }
  int scales() const { return top_; }
  QueryKind kind() const { return agg_.kind(); }
  const Agg &aggregate() const { return agg_; }

  /// Units at scale s: ceil(n / b^s).
  index_t unit_count(int s) const { return detail::ceil_div(n_, detail::ipow(b_, s)); }

  /// Number of stored aggregate slots across all scales.
  index_t storage_slots() const {
    if constexpr (in_place) {
      return static_cast<index_t>(slots_.size());
    } else {
      index_t total = 0;
      for (const auto &l : levels_) {
        total += static_cast<index_t>(l.size());
      }
      return total;
    }
  }

  /// Raw slot contents (in-place layout only).
  const std::vector<value_type> &slots() const
    requires in_place
  {
    return slots_;
  }

  /// Scale of the value physically held by slot i (in-place layout only).
  int stored_scale(index_t slot) const
    requires in_place
  {
    if (slot == 0) {
      return top_;
    }
    int s = 1;
    while (s < top_ && slot % b_ == 0) {
      slot /= b_;
      ++s;
    }
    return s;
  }

  /// Value of unit u at scale s, recovering it through the inverse of F when
  /// its slot has been overwritten by a coarser scale.
  value_type value(int s, index_t u, QueryStats *stats = nullptr) const {
    if (s < 1 || s > top_ || u < 0 || u >= unit_count(s)) {
      throw bounds_error("HierarchicalBinBuffer::value: no unit " + std::to_string(u) +
                         " at scale " + std::to_string(s));
    }
    if constexpr (in_place) {
      const index_t slot = u * detail::ipow(b_, s - 1);
      if (s == top_ || u % b_ != 0) {
        if (stats != nullptr) {
          stats->slot_reads += 1;
        }
        return slots_[static_cast<std::size_t>(slot)];
      }
      if (stats != nullptr) {
        stats->recoveries += 1;
      }
      auto rest = agg_.identity();
      for (index_t v = u + 1; v < std::min(unit_count(s), u + b_); ++v) {
        rest = agg_.merge(rest, value(s, v, stats));
      }
      return agg_.invert(value(s + 1, u / b_, stats), rest);
    } else {
      if (stats != nullptr) {
        stats->slot_reads += 1;
      }
      return levels_[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(u)];
    }
  }

  template <ReadableArray A>
  value_type query(const A &a, index_t k, index_t l, QueryStats *stats = nullptr) const {
    detail::check_range(k, l, n_, "HierarchicalBinBuffer::query");
    const index_t first = detail::ceil_div(k, b_);
    const index_t last = (l == n_ - 1) ? unit_count(1) - 1 : (l + 1) / b_ - 1;
    if (first > last) {
      return detail::fold_elements(agg_, a, k, l, stats);
    }
    auto acc = detail::fold_elements(agg_, a, k, first * b_ - 1, stats);
    acc = agg_.merge(acc, aggregate_units(1, first, last, stats));
    const index_t tail_lo = std::min(n_, (last + 1) * b_);
    return agg_.merge(acc, detail::fold_elements(agg_, a, tail_lo, l, stats));
  }

  /// Adds delta to a_j and refreshes every scale. Linear kinds modify at
  /// most one slot per scale; MAX re-aggregates the chain of covering units.
  template <WritableArray A>
  void update(A &a, index_t j, double delta, UpdateStats *stats = nullptr) {
    detail::check_index(j, n_, "HierarchicalBinBuffer::update");
    a.set(j, a.get(j) + delta);
    if (stats != nullptr) {
      stats->element_reads += 1;
    }
    if (delta == 0.0) {
      return;
    }
    if constexpr (in_place && LinearAggregate<Agg>) {
      for (int s = 1; s <= top_; ++s) {
        const index_t u = j / detail::ipow(b_, s);
        if (s == top_ || u % b_ != 0) {
          const index_t slot = u * detail::ipow(b_, s - 1);
          agg_.apply_delta(slots_[static_cast<std::size_t>(slot)], j, delta);
          if (stats != nullptr) {
            stats->modified_slots.push_back(slot);
          }
        }
      }
    } else {
      static_assert(!in_place, "in-place storage requires a linear aggregate for updates");
      const index_t k = j / b_;
      const index_t hi = std::min(n_, (k + 1) * b_) - 1;
      levels_[0][static_cast<std::size_t>(k)] = detail::fold_elements(agg_, a, k * b_, hi, nullptr);
      if (stats != nullptr) {
        stats->element_reads += static_cast<std::uint64_t>(hi - k * b_ + 1);
        stats->modified_slots.push_back(k);
      }
      index_t offset = static_cast<index_t>(levels_[0].size());
      index_t u = k;
      for (int s = 2; s <= top_; ++s) {
        const auto &prev = levels_[static_cast<std::size_t>(s - 2)];
        u /= b_;
        auto acc = agg_.identity();
        for (index_t v = u * b_; v < std::min<index_t>(static_cast<index_t>(prev.size()), (u + 1) * b_);
             ++v) {
          acc = agg_.merge(acc, prev[static_cast<std::size_t>(v)]);
        }
        levels_[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(u)] = std::move(acc);
        if (stats != nullptr) {
          stats->modified_slots.push_back(offset + u);
        }
        offset += static_cast<index_t>(levels_[static_cast<std::size_t>(s - 1)].size());
      }
    }
  }

private:
  HierarchicalBinBuffer(Agg agg, index_t n, index_t b, int top)
      : agg_(std::move(agg)), n_(n), b_(b), top_(top) {}

  // F over units lo..hi of scale s, delegating whole groups to scale s+1.
  value_type aggregate_units(int s, index_t lo, index_t hi, QueryStats *stats) const {
    if (lo > hi) {
      return agg_.identity();
    }
    auto fold = [&](index_t from, index_t to) {
      auto acc = agg_.identity();
      for (index_t u = from; u <= to; ++u) {
        acc = agg_.merge(acc, value(s, u, stats));
      }
      if (stats != nullptr && from <= to) {
        stats->terms += static_cast<std::uint64_t>(to - from + 1);
      }
      return acc;
    };
    if (s == top_) {
      return fold(lo, hi);
    }
    const index_t g_lo = detail::ceil_div(lo, b_);
    const index_t g_hi = (hi == unit_count(s) - 1) ? unit_count(s + 1) - 1 : (hi + 1) / b_ - 1;
    if (g_lo > g_hi) {
      return fold(lo, hi);
    }
    auto acc = fold(lo, g_lo * b_ - 1);
    acc = agg_.merge(acc, aggregate_units(s + 1, g_lo, g_hi, stats));
    return agg_.merge(acc, fold(std::min(unit_count(s), (g_hi + 1) * b_), hi));
  }

  Agg agg_;
  index_t n_;
  index_t b_;
  int top_;
  std::vector<value_type> slots_;
  std::vector<std::vector<value_type>> levels_;
};

} // namespace olabuf
