#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fragtree/moments.hpp"
#include "fragtree/rng.hpp"

namespace fragtree {
namespace {

struct TwoPass {
  double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

TwoPass two_pass(const std::vector<double>& v) {
  TwoPass r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) {
    const double d = x - r.mean;
    r.m2 += d * d;
    r.m3 += d * d * d;
    r.m4 += d * d * d * d;
  }
  const double n = static_cast<double>(v.size());
  r.m2 /= n;
  r.m3 /= n;
  r.m4 /= n;
  return r;
}

TEST(MomentAccumulator, EmptyAndSingleton) {
  MomentAccumulator a;
  EXPECT_EQ(a.count(), 0u);
  EXPECT_FALSE(a.variance().has_value());
  a.add(3.0);
  EXPECT_DOUBLE_EQ(a.mean(), 3.0);
  EXPECT_FALSE(a.variance().has_value());
  EXPECT_FALSE(a.standard_error().has_value());
}

TEST(MomentAccumulator, MatchesTwoPassFormulas) {
  Rng rng(1);
  std::vector<double> v;
  MomentAccumulator acc;
  for (int i = 0; i < 10'000; ++i) {
    const double x = 1e6 + rng.exponential();
    v.push_back(x);
    acc.add(x);
  }
  const TwoPass ref = two_pass(v);
  EXPECT_NEAR(acc.mean(), ref.mean, 1e-8);
  EXPECT_NEAR(acc.central_moment2(), ref.m2, 1e-9 * ref.m2);
  EXPECT_NEAR(acc.central_moment3(), ref.m3, 1e-7 * std::abs(ref.m3));
  EXPECT_NEAR(acc.central_moment4(), ref.m4, 1e-7 * ref.m4);
  EXPECT_NEAR(*acc.variance(), ref.m2 * 1e4 / 9999.0, 1e-9 * ref.m2);
  EXPECT_NEAR(*acc.skewness(), 2.0, 0.3);
  EXPECT_NEAR(*acc.excess_kurtosis(), 6.0, 2.0);
}

TEST(MomentAccumulator, MergeEqualsSequentialAdd) {
  Rng rng(2);
  MomentAccumulator all;
  MomentAccumulator left;
  MomentAccumulator right;
  MomentAccumulator empty;
  for (int i = 0; i < 3000; ++i) {
    const double x = rng.normal() * 5.0 + 2.0;
    all.add(x);
    (i < 1000 ? left : right).add(x);
  }
  left.merge(empty);
  left.merge(right);
  EXPECT_EQ(left.count(), all.count());
  EXPECT_NEAR(left.mean(), all.mean(), 1e-12);
  EXPECT_NEAR(left.central_moment2(), all.central_moment2(), 1e-10);
  EXPECT_NEAR(left.central_moment3(), all.central_moment3(), 1e-9);
  EXPECT_NEAR(left.central_moment4(), all.central_moment4(), 1e-8);
  EXPECT_DOUBLE_EQ(left.min(), all.min());
  EXPECT_DOUBLE_EQ(left.max(), all.max());
  empty.merge(all);
  EXPECT_DOUBLE_EQ(empty.mean(), all.mean());
}

}  // namespace
}  // namespace fragtree
