#pragma once

// Prefix Sum (PS) and Relative Prefix Sum (RPS) range-sum buffers.

#include <cmath>
#include <cstdint>
#include <vector>

#include "olabuf/error.hpp"
#include "olabuf/storage.hpp"

namespace olabuf {

/// Access counters shared by the baseline buffers.
struct BaselineStats {
  std::uint64_t buffer_reads = 0;
  std::uint64_t local_writes = 0;
  std::uint64_t overlay_writes = 0;
};

struct PrefixSumBuffer {
  std::vector<double> sums;

  index_t size() const { return static_cast<index_t>(sums.size()); }
};

template <ReadableArray A>
PrefixSumBuffer ps_build(const A &a) {
  PrefixSumBuffer buf;
  buf.sums.resize(static_cast<std::size_t>(a.size()));
  double acc = 0.0;
  for (index_t i = 0; i < a.size(); ++i) {
    acc += a.get(i);
    buf.sums[static_cast<std::size_t>(i)] = acc;
  }
  return buf;
}

inline double ps_query(const PrefixSumBuffer &buf, index_t k, index_t l,
                       BaselineStats *stats = nullptr) {
  detail::check_range(k, l, buf.size(), "ps_query");
  const double hi = buf.sums[static_cast<std::size_t>(l)];
  const double lo = k == 0 ? 0.0 : buf.sums[static_cast<std::size_t>(k - 1)];
  if (stats != nullptr) {
    stats->buffer_reads += k == 0 ? 1 : 2;
  }
  return hi - lo;
}

inline void ps_update(PrefixSumBuffer &buf, index_t j, double delta,
                      BaselineStats *stats = nullptr) {
  detail::check_index(j, buf.size(), "ps_update");
  if (delta == 0.0) {
    return;
  }
  for (std::size_t i = static_cast<std::size_t>(j); i < buf.sums.size(); ++i) {
    buf.sums[i] += delta;
  }
  if (stats != nullptr) {
    stats->local_writes += static_cast<std::uint64_t>(buf.size() - j);
  }
}

/// Prefix sums restarted every `block` elements, plus an overlay holding the
/// running total of all preceding blocks.
struct RelativePrefixSumBuffer {
  index_t block = 1;
  std::vector<double> local;
  /// overlay[t] = a_0 + ... + a_{(t+1) block - 1}.
  std::vector<double> overlay;

  index_t size() const { return static_cast<index_t>(local.size()); }

  /// Equivalent PS entry, two reads.
  double prefix(index_t i, BaselineStats *stats = nullptr) const {
    const index_t t = i / block;
    double v = local[static_cast<std::size_t>(i)];
    if (stats != nullptr) {
      stats->buffer_reads += 1;
    }
    if (t > 0) {
      v += overlay[static_cast<std::size_t>(t - 1)];
      if (stats != nullptr) {
        stats->buffer_reads += 1;
      }
    }
    return v;
  }
};

inline index_t rps_default_block(index_t n) {
  if (n <= 1) {
    return 1;
  }
  auto b = static_cast<index_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  while ((b - 1) * (b - 1) >= n) {
    --b;
  }
  while (b * b < n) {
    ++b;
  }
  return b;
}

/// Pass block = 0 for ⌈√n⌉.
template <ReadableArray A>
RelativePrefixSumBuffer rps_build(const A &a, index_t block = 0) {
  const index_t n = a.size();
  if (block == 0) {
    block = rps_default_block(n);
  }
  if (block < 1) {
    throw parameter_error("rps_build: block size must be positive");
  }
  RelativePrefixSumBuffer buf;
  buf.block = block;
  buf.local.resize(static_cast<std::size_t>(n));
  buf.overlay.resize(static_cast<std::size_t>(n / block));
  double running = 0.0;
  double total = 0.0;
  for (index_t i = 0; i < n; ++i) {
    if (i % block == 0) {
      running = 0.0;
    }
    const double v = a.get(i);
    running += v;
    total += v;
    buf.local[static_cast<std::size_t>(i)] = running;
    if ((i + 1) % block == 0) {
      buf.overlay[static_cast<std::size_t>(i / block)] = total;
    }
  }
  return buf;
}

/// At most four buffer reads.
inline double rps_query(const RelativePrefixSumBuffer &buf, index_t k, index_t l,
                        BaselineStats *stats = nullptr) {
  detail::check_range(k, l, buf.size(), "rps_query");
  const double hi = buf.prefix(l, stats);
  const double lo = k == 0 ? 0.0 : buf.prefix(k - 1, stats);
  return hi - lo;
}

/// Touches the rest of j's block and every later overlay entry.
inline void rps_update(RelativePrefixSumBuffer &buf, index_t j, double delta,
                       BaselineStats *stats = nullptr) {
  detail::check_index(j, buf.size(), "rps_update");
  if (delta == 0.0) {
    return;
  }
  const index_t t = j / buf.block;
  const index_t block_end = std::min(buf.size(), (t + 1) * buf.block);
  for (index_t i = j; i < block_end; ++i) {
    buf.local[static_cast<std::size_t>(i)] += delta;
  }
  for (std::size_t u = static_cast<std::size_t>(t); u < buf.overlay.size(); ++u) {
    buf.overlay[u] += delta;
  }
  if (stats != nullptr) {
    stats->local_writes += static_cast<std::uint64_t>(block_end - j);
    stats->overlay_writes +=
        buf.overlay.size() > static_cast<std::size_t>(t) ? buf.overlay.size() - static_cast<std::size_t>(t) : 0;
  }
}

} // namespace olabuf
