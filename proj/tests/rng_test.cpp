#include "flipforge/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace flipforge;

TEST(Rng, SplitMix64KnownValues) {
  // Published SplitMix64 outputs for state 0 (first call increments first).
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, MatchesPythonReference) {
  // Frozen from tests/reference/sim_reference.py.
  Rng rng(7);
  EXPECT_EQ(rng.next(), 12923355070828475994ULL);
  EXPECT_EQ(rng.next(), 5142052590334782674ULL);
  EXPECT_EQ(derive_seed(5, "x", 3), 16594434714801306344ULL);
}

TEST(Rng, Uniform01InHalfOpenUnitInterval) {
  Rng rng(1);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, UniformIntCoversClosedRange) {
  Rng rng(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(1, 10);
    ASSERT_GE(v, 1u);
    ASSERT_LE(v, 10u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(rng.uniform_int(4, 4), 4u);
}

TEST(Rng, NormalPairMoments) {
  Rng rng(11);
  double s = 0, s2 = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const auto p = rng.normal_pair();
    s += p[0] + p[1];
    s2 += p[0] * p[0] + p[1] * p[1];
  }
  EXPECT_NEAR(s / (2 * n), 0.0, 0.02);
  EXPECT_NEAR(s2 / (2 * n), 1.0, 0.03);
}

TEST(Rng, DeriveSeedSeparatesLabelsAndIndices) {
  EXPECT_NE(derive_seed(1, "cell", 0), derive_seed(1, "cell", 1));
  EXPECT_NE(derive_seed(1, "cell", 0), derive_seed(1, "pair", 0));
  EXPECT_NE(derive_seed(1, "cell", 0), derive_seed(2, "cell", 0));
  EXPECT_EQ(derive_seed(5, "x", 3), derive_seed(5, "x", 3));
}
