#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "reprocg/long_accumulator.hpp"
#include "reprocg/oracle.hpp"
#include "test_support.hpp"

using namespace reprocg;

namespace {

double round_of(std::initializer_list<double> xs) {
  LongAccumulator acc;
  for (double x : xs) acc.accumulate(x);
  return acc.round();
}

// All full binary trees over leaves[lo, hi): every association order.
std::vector<LongAccumulator> all_merges(const std::vector<LongAccumulator>& leaves, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return {leaves[lo]};
  std::vector<LongAccumulator> out;
  for (std::size_t mid = lo + 1; mid < hi; ++mid) {
    for (const auto& l : all_merges(leaves, lo, mid)) {
      for (const auto& r : all_merges(leaves, mid, hi)) {
        LongAccumulator m = l;
        m.merge(r);
        out.push_back(m);
      }
    }
  }
  return out;
}

}  // namespace

TEST(LongAccumulator, Geometry) {
  EXPECT_EQ(LongAccumulator::kDigitBits + LongAccumulator::kCarryBits, 64);
  EXPECT_EQ(LongAccumulator::kCarrySafeOps, 2047u);
  // 42 digits of 52 bits cover 2^-1074 .. 2^1024 plus the sign and carry room.
  EXPECT_GE(LongAccumulator::kDigitCount * LongAccumulator::kDigitBits, 2098u + 52u);
}

TEST(LongAccumulator, ZeroRoundsToPositiveZero) {
  LongAccumulator acc;
  acc.accumulate(0.0);
  EXPECT_TRUE(acc.is_zero());
  const double r = acc.round();
  EXPECT_EQ(r, 0.0);
  EXPECT_FALSE(std::signbit(r));
  EXPECT_FALSE(std::signbit(LongAccumulator{}.round()));
}

TEST(LongAccumulator, IdentityRoundTrip) {
  testkit::Rng g(31);
  for (int i = 0; i < 100000; ++i) {
    const auto bits = g();
    double x = std::bit_cast<double>(bits);
    if (!std::isfinite(x)) continue;
    LongAccumulator acc;
    acc.accumulate(x);
    ASSERT_EQ(std::bit_cast<std::uint64_t>(acc.round()), std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x)) << x;
  }
  for (double x : {DBL_MAX, -DBL_MAX, DBL_MIN, 0x1p-1074, -0x1p-1074, 1.0}) {
    LongAccumulator acc;
    acc.accumulate(x);
    EXPECT_EQ(acc.round(), x);
  }
}

TEST(LongAccumulator, ExactCancellation) {
  EXPECT_EQ(round_of({1e308, 17.0, -1e308}), 17.0);
  EXPECT_EQ(round_of({1e100, 1.0, -1e100}), 1.0);
  EXPECT_EQ(round_of({1.0, 0x1p-60, -1.0}), 0x1p-60);
  EXPECT_EQ(round_of({-1.0, 0x1p-60}), -1.0 + 0x1p-60);
}

TEST(LongAccumulator, NonFiniteRejected) {
  LongAccumulator acc;
  EXPECT_THROW(acc.accumulate(INFINITY), domain_error);
  EXPECT_THROW(acc.accumulate(std::nan("")), domain_error);
}

TEST(LongAccumulator, RandomSumsMatchOracle) {
  testkit::Rng g(32);
  for (int rep = 0; rep < 3000; ++rep) {
    const int span = rep % 3 == 0 ? 1000 : 120;
    std::vector<double> xs = testkit::random_vector(g, 1 + rep % 64, -span, span);
    if (rep % 5 == 0) xs.push_back(-xs[0]);
    LongAccumulator acc;
    for (double x : xs) acc.accumulate(x);
    ASSERT_EQ(acc.round(), oracle::oracle_sum(xs));
  }
}

TEST(LongAccumulator, ManyOpsTriggerCarryNormalization) {
  LongAccumulator acc;
  std::vector<double> xs;
  testkit::Rng g(33);
  for (int i = 0; i < 10000; ++i) xs.push_back(std::ldexp(1.0 - 0x1p-53, 51) * (g() & 1 ? 1 : -1));
  for (double x : xs) {
    acc.accumulate(x);
    ASSERT_LT(acc.ops_since_normalize(), LongAccumulator::kCarrySafeOps);
  }
  EXPECT_EQ(acc.round(), oracle::oracle_sum(xs));
}

TEST(LongAccumulator, SingleCarry) {
  std::array<std::int64_t, LongAccumulator::kDigitCount> d{};
  d[5] = std::int64_t{1} << LongAccumulator::kDigitBits;
  LongAccumulator acc = LongAccumulator::from_digits(d);
  acc.normalize();
  EXPECT_EQ(acc.digits()[5], 0);
  EXPECT_EQ(acc.digits()[6], 1);
  // digit 6 has weight 2^(52*6 - 1074).
  EXPECT_EQ(acc.round(), std::ldexp(1.0, 52 * 6 - 1074));
}

TEST(LongAccumulator, NormalizeIdempotent) {
  testkit::Rng g(34);
  LongAccumulator acc;
  for (int i = 0; i < 500; ++i) acc.accumulate(testkit::random_double(g, -900, 900));
  acc.normalize();
  const auto before = std::vector<std::int64_t>(acc.digits().begin(), acc.digits().end());
  acc.normalize();
  EXPECT_TRUE(std::equal(before.begin(), before.end(), acc.digits().begin()));
  for (std::size_t i = 0; i + 1 < LongAccumulator::kDigitCount; ++i) {
    EXPECT_GE(acc.digits()[i], 0);
    EXPECT_LT(acc.digits()[i], std::int64_t{1} << LongAccumulator::kDigitBits);
  }
}

TEST(LongAccumulator, OverflowStatus) {
  LongAccumulator acc;
  for (int i = 0; i < 5000; ++i) acc.accumulate(DBL_MAX);
  acc.normalize();
  // 5000 * DBL_MAX still fits the fixed-point range; it rounds to infinity.
  EXPECT_EQ(acc.status(), LongAccumulator::Status::exact);
  EXPECT_EQ(acc.round(), INFINITY);

  std::array<std::int64_t, LongAccumulator::kDigitCount> d{};
  d[LongAccumulator::kDigitCount - 1] = std::int64_t{1} << 51;
  LongAccumulator big = LongAccumulator::from_digits(d);
  big.normalize();
  EXPECT_EQ(big.status(), LongAccumulator::Status::overflow);
  EXPECT_THROW((void)big.round(), overflow_error);
}

TEST(LongAccumulator, NegativeOverflowToInfinity) {
  LongAccumulator acc;
  acc.accumulate(-DBL_MAX);
  acc.accumulate(-DBL_MAX);
  EXPECT_EQ(acc.round(), -INFINITY);
}

TEST(LongAccumulator, MergeWithEmpty) {
  testkit::Rng g(35);
  LongAccumulator a;
  for (int i = 0; i < 100; ++i) a.accumulate(testkit::random_double(g, -50, 50));
  LongAccumulator m = a;
  m.merge(LongAccumulator{});
  a.normalize();
  EXPECT_TRUE(std::equal(a.digits().begin(), a.digits().end(), m.digits().begin()));
}

TEST(LongAccumulator, MergeCommutes) {
  testkit::Rng g(36);
  for (int rep = 0; rep < 200; ++rep) {
    LongAccumulator a, b;
    for (int i = 0; i < 50; ++i) a.accumulate(testkit::random_double(g, -600, 600));
    for (int i = 0; i < 50; ++i) b.accumulate(testkit::random_double(g, -600, 600));
    LongAccumulator ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    ASSERT_TRUE(std::equal(ab.digits().begin(), ab.digits().end(), ba.digits().begin()));
  }
}

TEST(LongAccumulator, MergeAllAssociationsAndOrders) {
  testkit::Rng g(37);
  std::vector<std::vector<double>> parts(6);
  std::vector<double> all;
  for (auto& p : parts) {
    p = testkit::random_vector(g, 40, -300, 300);
    all.insert(all.end(), p.begin(), p.end());
  }
  const double want = oracle::oracle_sum(all);
  std::vector<std::size_t> perm(parts.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  int checked = 0;
  do {
    std::vector<LongAccumulator> leaves(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (double x : parts[perm[i]]) leaves[i].accumulate(x);
    for (const auto& m : all_merges(leaves, 0, leaves.size())) {
      ASSERT_EQ(m.round(), want);
      ++checked;
    }
  } while (std::next_permutation(perm.begin(), perm.end()) && checked < 30000);
  EXPECT_GT(checked, 1000);
}

TEST(LongAccumulator, MergeOfCarrySafeCountOfAccumulators) {
  testkit::Rng g(38);
  std::vector<LongAccumulator> accs(LongAccumulator::kCarrySafeOps + 1);
  std::vector<double> all;
  for (auto& a : accs) {
    for (int i = 0; i < 3; ++i) {
      const double x = testkit::random_double(g, -1000, 1000);
      a.accumulate(x);
      all.push_back(x);
    }
  }
  const double want = oracle::oracle_sum(all);
  for (int order = 0; order < 4; ++order) {
    std::shuffle(accs.begin(), accs.end(), g);
    LongAccumulator root;
    for (const auto& a : accs) root.merge(a);
    ASSERT_EQ(root.round(), want);
  }
}

TEST(LongAccumulator, Serialization) {
  testkit::Rng g(39);
  LongAccumulator a;
  for (int i = 0; i < 300; ++i) a.accumulate(testkit::random_double(g, -1000, 1000));
  const auto bytes = a.to_bytes();
  ASSERT_EQ(bytes.size(), LongAccumulator::kSerializedBytes);
  const LongAccumulator b = LongAccumulator::from_bytes(bytes);
  EXPECT_EQ(a.round(), b.round());
  LongAccumulator an = a;
  an.normalize();
  EXPECT_TRUE(std::equal(an.digits().begin(), an.digits().end(), b.digits().begin()));
  EXPECT_THROW((void)LongAccumulator::from_bytes(std::span(bytes).first(10)), usage_error);
}
