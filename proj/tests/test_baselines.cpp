#include <gtest/gtest.h>

#include "olabuf/baselines.hpp"
#include "olabuf/moments.hpp"
#include "support.hpp"

using namespace olabuf;
using olabuf::testing::close;
using olabuf::testing::random_array;

TEST(PrefixSum, HandExample) {
  const MemoryArray a{1, 2, 3};
  PrefixSumBuffer ps = ps_build(a);
  EXPECT_EQ(ps.sums, (std::vector<double>{1, 3, 6}));
  EXPECT_EQ(ps_query(ps, 1, 2), 5.0);
  EXPECT_EQ(ps_query(ps, 0, 0), 1.0);
  ps_update(ps, 0, 4.0);
  EXPECT_EQ(ps.sums, (std::vector<double>{5, 7, 10}));
  EXPECT_THROW(ps_query(ps, 1, 3), bounds_error);
  EXPECT_THROW(ps_update(ps, 3, 1.0), bounds_error);
}

TEST(PrefixSum, TwoReadsPerQuery) {
  const MemoryArray a(10, 1.0);
  const PrefixSumBuffer ps = ps_build(a);
  BaselineStats st;
  ps_query(ps, 3, 7, &st);
  EXPECT_EQ(st.buffer_reads, 2U);
}

TEST(RelativePrefixSum, WorkedLayout) {
  const MemoryArray a{1, 2, 3, 4, 5, 6};
  const RelativePrefixSumBuffer rps = rps_build(a, 3);
  EXPECT_EQ(rps.local, (std::vector<double>{1, 3, 6, 4, 9, 15}));
  EXPECT_EQ(rps.overlay, (std::vector<double>{6, 21}));
  const PrefixSumBuffer ps = ps_build(a);
  for (index_t i = 0; i < 6; ++i) {
    EXPECT_EQ(rps.prefix(i), ps.sums[static_cast<std::size_t>(i)]);
  }
}

TEST(RelativePrefixSum, DefaultBlockIsCeilSqrt) {
  EXPECT_EQ(rps_default_block(100), 10);
  EXPECT_EQ(rps_default_block(101), 11);
  EXPECT_EQ(rps_default_block(1), 1);
  const MemoryArray a(50, 1.0);
  EXPECT_EQ(rps_build(a).block, 8);
}

TEST(RelativePrefixSum, ZeroUpdateIsNoOp) {
  SplitMix64 rng(1);
  const MemoryArray a = random_array(rng, 40);
  RelativePrefixSumBuffer rps = rps_build(a);
  const auto local = rps.local;
  const auto overlay = rps.overlay;
  BaselineStats st;
  rps_update(rps, 11, 0.0, &st);
  EXPECT_EQ(rps.local, local);
  EXPECT_EQ(rps.overlay, overlay);
  EXPECT_EQ(st.local_writes + st.overlay_writes, 0U);
}

TEST(Baselines, AgreeWithOracleAndEachOther) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const index_t n = rng.between(2, 3000);
    MemoryArray a = random_array(rng, n);
    PrefixSumBuffer ps = ps_build(a);
    RelativePrefixSumBuffer rps = rps_build(a, trial % 3 == 0 ? 0 : rng.between(1, 80));
    for (int u = 0; u < 3; ++u) {
      const index_t j = rng.between(0, n - 1);
      const double d = rng.uniform(-1.0, 1.0);
      a.set(j, a.get(j) + d);
      ps_update(ps, j, d);
      BaselineStats st;
      rps_update(rps, j, d, &st);
      EXPECT_LE(st.local_writes + st.overlay_writes,
                static_cast<std::uint64_t>(rps.block + n / rps.block));
    }
    const index_t lo = rng.between(0, n - 1);
    const index_t hi = rng.between(lo, n - 1);
    const RangePolynomial f = RangePolynomial::range_sum(lo, hi);
    const double ref = brute_query(a, f);
    const double scale = brute_query_magnitude(a, f) + brute_query_magnitude(a, RangePolynomial::range_sum(0, hi));
    BaselineStats st;
    const double r = rps_query(rps, lo, hi, &st);
    EXPECT_LE(st.buffer_reads, 4U);
    EXPECT_TRUE(close(ps_query(ps, lo, hi), ref, scale));
    EXPECT_TRUE(close(r, ref, scale));
  }
}
