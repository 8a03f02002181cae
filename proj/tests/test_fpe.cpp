#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <vector>

#include "reprocg/fpe.hpp"
#include "reprocg/oracle.hpp"
#include "test_support.hpp"

using namespace reprocg;
using reprocg::oracle::ExactValue;

namespace {

ExactValue exact_of(const Fpe& f) {
  ExactValue v;
  for (double c : f.components()) v.add(c);
  return v;
}

bool non_overlapping(const Fpe& f) {
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i - 1] == 0.0) {
      if (f[i] != 0.0) return false;
      continue;
    }
    if (f[i - 1] + f[i] != f[i - 1]) return false;
  }
  return true;
}

}  // namespace

TEST(Fpe, SizeBounds) {
  EXPECT_THROW(Fpe(0), usage_error);
  EXPECT_THROW(Fpe(17), usage_error);
  EXPECT_NO_THROW(Fpe(1));
  EXPECT_NO_THROW(Fpe(16));
}

TEST(Fpe, AccumulateIntoZero) {
  const Fpe f = accumulate(Fpe(8), 1.0);
  EXPECT_EQ(f[0], 1.0);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_EQ(f[i], 0.0);
  EXPECT_FALSE(f.residue());
}

TEST(Fpe, DisjointExponents) {
  const Fpe f = accumulate(accumulate(Fpe(8), 1.0), 0x1p-60);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_EQ(f[1], 0x1p-60);
  EXPECT_EQ(f[2], 0.0);
}

TEST(Fpe, NonFiniteRejected) { EXPECT_THROW((void)accumulate(Fpe(4), INFINITY), domain_error); }

TEST(Fpe, RandomAccumulationMatchesOracle) {
  testkit::Rng g(21);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xs = testkit::random_vector(g, 10000, -40, 40);
    Fpe f(8);
    for (double x : xs) f.accumulate(x);
    ASSERT_FALSE(f.residue());
    EXPECT_EQ(round_near_sum(f), oracle::oracle_sum(xs));
    ExactValue want;
    for (double x : xs) want.add(x);
    EXPECT_TRUE(exact_of(f) == want);
  }
}

TEST(Fpe, EarlyExitMatchesFullCascade) {
  testkit::Rng g(22);
  for (int rep = 0; rep < 200; ++rep) {
    Fpe a(6), b(6);
    for (int i = 0; i < 500; ++i) {
      const double x = testkit::random_double(g, -200, 200);
      const double ra = a.absorb<true>(x);
      const double rb = b.absorb<false>(x);
      ASSERT_EQ(ra, rb);
    }
    ASSERT_TRUE(exact_of(a) == exact_of(b));
    ASSERT_EQ(round_near_sum(a), round_near_sum(b));
  }
}

TEST(Fpe, ResidueFlagOnOverflowingCarry) {
  Fpe f(2);
  f.accumulate(1e150);
  f.accumulate(1.0);
  EXPECT_FALSE(f.residue());
  f.accumulate(1e-150);
  EXPECT_TRUE(f.residue());
}

TEST(Fpe, PermutationInvarianceOfRoundedValue) {
  testkit::Rng g(23);
  std::vector<double> xs = testkit::random_vector(g, 2000, -60, 60);
  Fpe ref(8);
  for (double x : xs) ref.accumulate(x);
  const double want = round_near_sum(ref);
  for (int rep = 0; rep < 50; ++rep) {
    std::shuffle(xs.begin(), xs.end(), g);
    Fpe f(8);
    for (double x : xs) f.accumulate(x);
    ASSERT_FALSE(f.residue());
    ASSERT_EQ(round_near_sum(f), want);
  }
}

TEST(FpeSum, ZeroIsIdentity) {
  testkit::Rng g(24);
  Fpe a(8);
  for (int i = 0; i < 100; ++i) a.accumulate(testkit::random_double(g, -30, 30));
  EXPECT_TRUE(bit_equal(fpe_sum(a, Fpe(8)), a));
}

TEST(FpeSum, ExactCancellation) {
  const Fpe out = fpe_sum(accumulate(Fpe(8), 1.0), accumulate(Fpe(8), -1.0));
  for (double c : out.components()) EXPECT_EQ(c, 0.0);
  EXPECT_FALSE(out.residue());
}

TEST(FpeSum, SizeMismatch) { EXPECT_THROW((void)fpe_sum(Fpe(4), Fpe(8)), usage_error); }

TEST(FpeSum, InteriorZeroAfterCancellation) {
  Fpe a(8);
  for (double x : {1e100, 1.0, -1e100}) a.accumulate(x);
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], 1.0);
  EXPECT_EQ(round_near_sum(fpe_sum(Fpe(8), a)), 1.0);
}

TEST(FpeSum, RandomMatchesOracle) {
  testkit::Rng g(25);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> xa = testkit::random_vector(g, 300, -80, 80);
    std::vector<double> xb = testkit::random_vector(g, 300, -80, 80);
    Fpe a(8), b(8);
    for (double x : xa) a.accumulate(x);
    for (double x : xb) b.accumulate(x);
    const Fpe s = fpe_sum(a, b);
    ASSERT_FALSE(s.residue());
    std::vector<double> all;
    for (double c : a.components()) all.push_back(c);
    for (double c : b.components()) all.push_back(c);
    ASSERT_EQ(round_near_sum(s), oracle::oracle_sum(all));
  }
}

TEST(Renormalize, AlreadyNonOverlapping) {
  const std::array<double, 3> c{1.0, 0x1p-60, 0x1p-130};
  const Fpe f = Fpe::from_components(c, 8);
  const Fpe r = renormalize(f);
  EXPECT_TRUE(bit_equal(r, f));
}

TEST(Renormalize, OrdersPair) {
  const std::array<double, 2> c{0x1p-53, 1.0};
  const Fpe r = renormalize(Fpe::from_components(c, 8));
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[1], 0x1p-53);
  EXPECT_EQ(r[2], 0.0);
}

TEST(Renormalize, RandomOverlappingKeepsValue) {
  testkit::Rng g(26);
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> c = testkit::random_vector(g, 8, -30, 30);
    if (rep % 3 == 0) c[2] = -c[0];
    const Fpe f = Fpe::from_components(c, 8);
    const Fpe r = renormalize(f);
    ASSERT_TRUE(exact_of(r) == exact_of(f));
    ASSERT_TRUE(non_overlapping(r));
  }
}

TEST(RoundNearSum, TieToEven) {
  const std::array<double, 2> c{1.0, 0x1p-53};
  EXPECT_EQ(round_near_sum(Fpe::from_components(c, 8)), 1.0);
}

TEST(RoundNearSum, TieBrokenByThirdTerm) {
  const std::array<double, 3> c{1.0, 0x1p-53, 0x1p-105};
  EXPECT_EQ(round_near_sum(Fpe::from_components(c, 8)), 1.0 + 0x1p-52);
  EXPECT_EQ(oracle::oracle_sum(c), 1.0 + 0x1p-52);
}

TEST(RoundNearSum, Singleton) {
  for (double x : {3.5, -0x1p-1074, 1e308}) {
    const std::array<double, 1> c{x};
    EXPECT_EQ(round_near_sum(Fpe::from_components(c, 4)), x);
  }
}

TEST(RoundNearSum, RandomExpansionsMatchOracle) {
  testkit::Rng g(27);
  for (int rep = 0; rep < 20000; ++rep) {
    const int spread = rep % 2 ? 200 : 60;
    std::vector<double> c = testkit::random_vector(g, 1 + rep % 8, -spread, spread);
    ASSERT_EQ(round_near_sum(Fpe::from_components(c, 8)), oracle::oracle_sum(c));
  }
}

TEST(Fpe, Serialization) {
  testkit::Rng g(28);
  Fpe f(5);
  for (int i = 0; i < 50; ++i) f.accumulate(testkit::random_double(g, -500, 500));
  const Fpe back = Fpe::from_bytes(f.to_bytes());
  EXPECT_TRUE(bit_equal(back, f));
  auto bytes = f.to_bytes();
  bytes.pop_back();
  EXPECT_THROW((void)Fpe::from_bytes(bytes), usage_error);
}
