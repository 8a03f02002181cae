#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "reprocg/generators.hpp"
#include "reprocg/pcg.hpp"
#include "test_support.hpp"

using namespace reprocg;

namespace {

CsrMatrix identity(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return assemble_csr(n, t);
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

}  // namespace

TEST(Jacobi, Build) {
  const CsrMatrix a = assemble_csr(2, {{0, 0, 2.0}, {1, 1, 4.0}});
  EXPECT_EQ(jacobi_build(a), (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(jacobi_build(identity(4)), std::vector<double>(4, 1.0));
}

TEST(Jacobi, BuildIsOneDivision) {
  testkit::Rng g(61);
  std::vector<Triplet> t;
  std::vector<double> d(200);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = std::abs(testkit::random_double(g, -30, 30));
    t.push_back({i, i, d[i]});
  }
  const auto m = jacobi_build(assemble_csr(d.size(), t));
  for (std::size_t i = 0; i < d.size(); ++i) {
    // 1/d correctly rounded: the residual 1 - d*m is below one ulp of m times d.
    EXPECT_EQ(m[i], 1.0 / d[i]);
    EXPECT_LE(std::abs(std::fma(-d[i], m[i], 1.0)), d[i] * (std::nextafter(m[i], INFINITY) - m[i]) / 2.0);
  }
}

TEST(Jacobi, Apply) {
  const std::vector<double> r{1.5, -2.0, 3.0};
  std::vector<double> z(3);
  jacobi_apply(std::vector<double>(3, 1.0), r, z);
  EXPECT_EQ(z, r);
  jacobi_apply(r, std::vector<double>(3, 0.0), z);
  for (double v : z) EXPECT_EQ(v, 0.0);
  testkit::Rng g(62);
  const auto m = testkit::random_vector(g, 100, -10, 10);
  const auto rr = testkit::random_vector(g, 100, -10, 10);
  std::vector<double> zz(100);
  jacobi_apply(m, rr, zz);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(zz[i], m[i] * rr[i]);
  EXPECT_THROW(jacobi_apply(m, std::vector<double>(3), zz), usage_error);
}

TEST(Axpy, Trivial) {
  std::vector<double> y{1.0, 2.0, 3.0};
  const std::vector<double> x{7.0, 8.0, 9.0};
  axpy_fma(0.0, x, y);
  EXPECT_EQ(y, (std::vector<double>{1.0, 2.0, 3.0}));
  std::vector<double> neg{-1.0, -2.0, -3.0};
  axpy_fma(1.0, neg, y);
  EXPECT_EQ(y, std::vector<double>(3, 0.0));
}

TEST(Axpy, SingleRounding) {
  testkit::Rng g(63);
  const auto x = testkit::random_vector(g, 500, -20, 20);
  const auto y0 = testkit::random_vector(g, 500, -20, 20);
  const double alpha = testkit::random_double(g, -3, 3);
  auto y = y0;
  axpy_fma(alpha, x, y);
  auto d = y0;
  xpay_fma(alpha, x, d);
  for (std::size_t i = 0; i < x.size(); ++i) {
    oracle::ExactValue e;
    e.add_product(alpha, x[i]);
    e.add(y0[i]);
    ASSERT_EQ(y[i], e.to_double());
    oracle::ExactValue f;
    f.add_product(alpha, y0[i]);
    f.add(x[i]);
    ASSERT_EQ(d[i], f.to_double());
  }
}

TEST(DirectError, Values) {
  const std::vector<double> ones(5, 1.0), twos(5, 2.0);
  EXPECT_EQ(direct_error(ones, ones), 0.0);
  EXPECT_EQ(direct_error(twos, ones), 1.0);
  EXPECT_THROW((void)direct_error(ones, std::vector<double>(5, 0.0)), usage_error);
  EXPECT_THROW((void)direct_error(ones, std::vector<double>(4, 1.0)), usage_error);
}

TEST(Pcg, IdentityConvergesInOneIteration) {
  testkit::Rng g(64);
  const auto b = testkit::random_vector(g, 10, -5, 5);
  for (Variant v : {Variant::baseline, Variant::exblas, Variant::opt}) {
    SolverConfig cfg;
    cfg.variant = v;
    const auto r = pcg_solve(identity(10), b, cfg);
    EXPECT_EQ(r.iterations, 1u);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.x, b);
    EXPECT_EQ(r.residual_history.size(), 2u);
  }
}

TEST(Pcg, PoissonConvergesAndIsAccurate) {
  const CsrMatrix a = gen_poisson27(8, 8, 8);
  const auto b = rhs_from_ones(a);
  const std::vector<double> ones(a.rows(), 1.0);
  SolverConfig cfg;
  const auto r = pcg_solve(a, b, cfg, ones);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual_history.back(), 1e-8);
  EXPECT_EQ(r.residual_history.size(), r.iterations + 1);
  EXPECT_EQ(r.rho_history.size(), r.iterations);
  EXPECT_LT(r.direct_error, 1e-5);
}

TEST(Pcg, TopologyInvarianceSmall) {
  const CsrMatrix a = gen_poisson27(8, 8, 8);
  const auto b = rhs_from_ones(a);
  SolverConfig ref_cfg;
  const auto ref = pcg_solve(a, b, ref_cfg);
  const Topology grid[] = {{1, 1, 256}, {2, 1, 256}, {4, 1, 256}, {1, 2, 13}, {2, 2, 13}, {4, 2, 13},
                           {1, 4, 1},   {2, 4, 1},   {8, 4, 1},   {3, 3, 512}, {8, 1, 7}, {5, 2, 100}};
  for (Variant v : {Variant::exblas, Variant::opt}) {
    for (const Topology& t : grid) {
      SolverConfig cfg;
      cfg.variant = v;
      cfg.topology = t;
      const auto r = pcg_solve(a, b, cfg);
      ASSERT_EQ(r.iterations, ref.iterations);
      ASSERT_TRUE(same_bits(r.residual_history, ref.residual_history));
      ASSERT_TRUE(same_bits(r.x, ref.x));
      ASSERT_FALSE(r.residue_warning);
    }
  }
}

TEST(Pcg, RepeatedThreadedRunsAgree) {
  const CsrMatrix a = gen_poisson27(6, 6, 6);
  const auto b = rhs_from_ones(a);
  SolverConfig cfg;
  cfg.topology = {2, 4, 16};
  Schedule s = Schedule::threaded();
  const auto r1 = pcg_solve(a, b, cfg, s);
  const auto r2 = pcg_solve(a, b, cfg, s);
  EXPECT_TRUE(same_bits(r1.residual_history, r2.residual_history));
  EXPECT_TRUE(same_bits(r1.x, r2.x));
}

TEST(Pcg, RootNormStopsEarlier) {
  const CsrMatrix a = gen_poisson27(6, 6, 6);
  const auto b = rhs_from_ones(a);
  SolverConfig sq, root;
  root.norm = ConvergenceNorm::root;
  const auto rs = pcg_solve(a, b, sq);
  const auto rr = pcg_solve(a, b, root);
  EXPECT_LE(std::sqrt(rr.residual_history.back()), 1e-8);
  EXPECT_LE(rr.iterations, rs.iterations + 10);
  EXPECT_GE(rr.iterations, rs.iterations);
}

TEST(Pcg, NonConvergenceIsReported) {
  const CsrMatrix a = gen_poisson27(6, 6, 6);
  SolverConfig cfg;
  cfg.max_iterations = 3;
  const auto r = pcg_solve(a, rhs_from_ones(a), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3u);
}

TEST(Pcg, BreakdownOnIndefinite) {
  // Positive diagonal but indefinite: [[1, 2], [2, 1]].
  const CsrMatrix a = assemble_csr(2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}});
  const std::vector<double> b{1.0, -1.0};
  SolverConfig cfg;
  EXPECT_THROW((void)pcg_solve(a, b, cfg), breakdown_error);
}

TEST(Pcg, ConfigErrors) {
  const CsrMatrix a = identity(3);
  const std::vector<double> b(3, 1.0);
  SolverConfig cfg;
  cfg.tolerance = 0.0;
  EXPECT_THROW((void)pcg_solve(a, b, cfg), usage_error);
  cfg = {};
  cfg.variant = Variant::opt;
  cfg.fpe_size = 1;
  EXPECT_THROW((void)pcg_solve(a, b, cfg), usage_error);
  cfg = {};
  EXPECT_THROW((void)pcg_solve(a, std::vector<double>(2, 1.0), cfg), usage_error);
}
