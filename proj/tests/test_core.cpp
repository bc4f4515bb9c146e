#include <gtest/gtest.h>

#include "olabuf/moments.hpp"
#include "support.hpp"

using namespace olabuf;
using olabuf::testing::close;

namespace {

double magnitude(const MomentTuple &t) {
  double s = 0.0;
  for (double v : t.values()) {
    s += std::abs(v);
  }
  return s;
}

void expect_tuple_near(const MomentTuple &x, const MomentTuple &y, double scale) {
  ASSERT_EQ(x.order_count(), y.order_count());
  EXPECT_EQ(x.anchor(), y.anchor());
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    EXPECT_TRUE(close(x[i], y[i], scale)) << "component " << i << ": " << x[i] << " vs " << y[i];
  }
}

} // namespace

TEST(Singleton, MatchesDefinition) {
  const MomentTuple t = g_singleton(5.0, 3, 3);
  EXPECT_EQ(t.anchor(), 3);
  EXPECT_EQ(t, MomentTuple(3, {1.0, 5.0, 0.0}));
  EXPECT_EQ(g_singleton(0.0, 0, 2), MomentTuple(0, {1.0, 0.0}));
  EXPECT_EQ(g_singleton(2.0, 7, 4), MomentTuple(7, {1.0, 2.0, 0.0, 0.0}));
}

TEST(Singleton, RejectsArityBelowTwo) {
  EXPECT_THROW(g_singleton(1.0, 0, 1), parameter_error);
  EXPECT_THROW(g_singleton(1.0, 0, 0), parameter_error);
}

TEST(Merge, TwoPointExample) {
  const MomentTuple m = f_merge(g_singleton(1.0, 0, 3), g_singleton(2.0, 1, 3));
  EXPECT_EQ(m, MomentTuple(0, {2.0, 3.0, 2.0}));
}

TEST(Merge, EmptyIsIdentityOnBothSides) {
  const MomentTuple t(4, {3.0, 1.5, -2.0, 7.0});
  EXPECT_EQ(f_merge(t, MomentTuple::empty(4, 100)), t);
  EXPECT_EQ(f_merge(MomentTuple::empty(4, -9), t), t);
}

TEST(Merge, DegreeZeroAndOneAdd) {
  const MomentTuple m = f_merge(g_singleton(1.25, 10, 2), g_singleton(-4.0, 11, 2));
  EXPECT_DOUBLE_EQ(m.count(), 2.0);
  EXPECT_DOUBLE_EQ(m.moment(0), -2.75);
}

TEST(Merge, ArityMismatchThrows) {
  EXPECT_THROW(f_merge(g_singleton(1.0, 0, 3), g_singleton(1.0, 1, 4)), parameter_error);
}

TEST(Recenter, ShiftsFirstMoment) {
  const MomentTuple t(0, {2.0, 3.0, 2.0});
  const MomentTuple r = recenter(t, -1);
  EXPECT_DOUBLE_EQ(r.moment(1), 5.0);
  EXPECT_DOUBLE_EQ(r.moment(0), 3.0);
  EXPECT_EQ(recenter(t, 0), t);
  EXPECT_EQ(recenter(MomentTuple::empty(5, 2), 40), MomentTuple::empty(5, 40));
}

TEST(Recenter, RoundTripRestoresTuple) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = static_cast<int>(rng.between(2, 12));
    const auto a = olabuf::testing::random_array(rng, rng.between(1, 40));
    const MomentTuple t = brute_moments(a, 0, a.size() - 1, m);
    const index_t c = rng.between(-30, 30);
    expect_tuple_near(recenter(recenter(t, c), 0), t, magnitude(recenter(t, c)) + magnitude(t));
  }
}

TEST(Merge, AssociativeOnAdjacentRanges) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = static_cast<int>(rng.between(2, 8));
    const index_t n = rng.between(3, 64);
    const auto a = olabuf::testing::random_array(rng, n);
    const index_t i = rng.between(1, n - 2);
    const index_t j = rng.between(i + 1, n - 1);
    const MomentTuple x = brute_moments(a, 0, i - 1, m);
    const MomentTuple y = brute_moments(a, i, j - 1, m);
    const MomentTuple z = brute_moments(a, j, n - 1, m);
    const MomentTuple left = f_merge(f_merge(x, y), z);
    const MomentTuple right = f_merge(x, f_merge(y, z));
    expect_tuple_near(left, right, magnitude(left));
  }
}

TEST(Merge, FoldedSingletonsEqualBruteMoments) {
  SplitMix64 rng(13);
  for (int m = 2; m <= 17; ++m) {
    for (int trial = 0; trial < 6; ++trial) {
      const index_t n = rng.between(1, 256);
      auto a = olabuf::testing::random_array(rng, n);
      const index_t lo = rng.between(0, n - 1);
      const index_t hi = rng.between(lo, n - 1);
      MomentTuple acc = MomentTuple::empty(m, lo);
      for (index_t i = lo; i <= hi; ++i) {
        acc = f_merge(acc, g_singleton(a.get(i), i, m));
      }
      const MomentTuple ref = brute_moments(a, lo, hi, m);
      // The oracle's natural scale: Σ |i - lo|^k |a_i| per component.
      MomentTuple scale = MomentTuple::empty(m, lo);
      for (index_t i = lo; i <= hi; ++i) {
        double p = 1.0;
        for (int k = 0; k <= m - 2; ++k) {
          scale[static_cast<std::size_t>(k) + 1] += p * std::abs(a.get(i));
          p *= static_cast<double>(i - lo);
        }
      }
      for (std::size_t c = 0; c < ref.values().size(); ++c) {
        EXPECT_TRUE(close(acc[c], ref[c], std::max(scale[c], 1.0)))
            << "m=" << m << " component " << c;
      }
    }
  }
}

TEST(Invert, RecoversLeftPart) {
  SplitMix64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = static_cast<int>(rng.between(2, 8));
    const index_t n = rng.between(2, 50);
    const auto a = olabuf::testing::random_array(rng, n);
    const index_t i = rng.between(1, n - 1);
    const MomentTuple x = brute_moments(a, 0, i - 1, m);
    const MomentTuple y = brute_moments(a, i, n - 1, m);
    expect_tuple_near(f_invert(f_merge(x, y), y), x, magnitude(f_merge(x, y)));
  }
}

TEST(BruteQuery, HandExamples) {
  const MemoryArray a{1, 2, 3, 4, 5, 6};
  EXPECT_DOUBLE_EQ(brute_query(a, RangePolynomial::range_sum(1, 4)), 14.0);
  EXPECT_DOUBLE_EQ(brute_query(a, RangePolynomial(0, 5, {})), 0.0);
  const MemoryArray ones{1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(brute_query(ones, RangePolynomial::moment(0, 3, 1)), 6.0);
  EXPECT_THROW(brute_query(a, RangePolynomial::range_sum(2, 6)), bounds_error);
}

TEST(BruteMax, HandExamples) {
  const MemoryArray a{3, 1, 4, 1, 5};
  EXPECT_EQ(brute_max(a, 0, 4), 5.0);
  EXPECT_EQ(brute_max(a, 2, 2), 4.0);
  const MemoryArray flat{7, 7, 7};
  EXPECT_EQ(brute_max(flat, 0, 2), 7.0);
  EXPECT_THROW(brute_max(a, 3, 1), bounds_error);
}

TEST(RangePolynomial, ZeroOutsideAndHorner) {
  const RangePolynomial f(10, 20, {1.0, 2.0, 3.0});
  EXPECT_EQ(f(9), 0.0);
  EXPECT_EQ(f(21), 0.0);
  EXPECT_DOUBLE_EQ(f(10), 1.0);
  EXPECT_DOUBLE_EQ(f(12), 1.0 + 4.0 + 12.0);
  EXPECT_EQ(f.degree(), 2);
  EXPECT_EQ(RangePolynomial(0, 1, {0.0, 0.0}).degree(), -1);
  EXPECT_THROW(RangePolynomial(5, 4, {1.0}), parameter_error);
}

TEST(QueryKind, Classification) {
  EXPECT_TRUE(QueryKind::sum().linear());
  EXPECT_TRUE(QueryKind::sum().invertible());
  EXPECT_TRUE(QueryKind::moments_of(4).linear());
  EXPECT_TRUE(QueryKind::moments_of(4).invertible());
  EXPECT_FALSE(QueryKind::max().linear());
  EXPECT_FALSE(QueryKind::max().invertible());
}

TEST(Binomial, PascalRows) {
  EXPECT_EQ(binomial(4, 2), 6.0);
  EXPECT_EQ(binomial(32, 16), 601080390.0);
  EXPECT_EQ(binomial(0, 0), 1.0);
}
