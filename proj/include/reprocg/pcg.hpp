#pragma once

// Jacobi-preconditioned conjugate gradients with reproducible kernels.
//
// Per iteration:
//   beta' := beta
//   w := A d                            row-wise fma chains
//   rho := beta / <d, w>                reduction 1
//   x := x + rho d,  r := r - rho w     one fma per element
//   z := M^{-1} r                       one multiply per element
//   beta := <z, r>, tau := <r, r>       reduction 2, fused into one phase
//   d := (beta / beta') d + z           one fma per element
// and the loop runs while tau > tolerance. With the exblas and opt
// variants every dot product is correctly rounded, so the whole iteration
// state is independent of the topology and of the worker schedule.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "reprocg/csr_matrix.hpp"
#include "reprocg/errors.hpp"
#include "reprocg/repro_reduce.hpp"

namespace reprocg {

/// m_i = 1 / a_ii, a single correctly rounded division per row.
[[nodiscard]] inline std::vector<double> jacobi_build(const CsrMatrix& a) {
  std::vector<double> m(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double d = a.diagonal(i);
    if (!(d > 0.0)) throw precondition_error("jacobi_build: non-positive diagonal in row " + std::to_string(i));
    m[i] = 1.0 / d;
  }
  return m;
}

inline void jacobi_apply(std::span<const double> m, std::span<const double> r, std::span<double> z) {
  if (m.size() != r.size() || z.size() != r.size()) throw usage_error("jacobi_apply: length mismatch");
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = m[i] * r[i];
}

/// y := y + alpha x, one fma per element.
inline void axpy_fma(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw usage_error("axpy_fma: length mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

/// y := alpha y + x, one fma per element (the search-direction update).
inline void xpay_fma(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw usage_error("xpay_fma: length mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::fma(alpha, y[i], x[i]);
}

/// ||x - x_exact||_inf / ||x_exact||_inf
[[nodiscard]] inline double direct_error(std::span<const double> x, std::span<const double> x_exact) {
  if (x.size() != x_exact.size()) throw usage_error("direct_error: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num = std::max(num, std::abs(x[i] - x_exact[i]));
    den = std::max(den, std::abs(x_exact[i]));
  }
  if (den == 0.0) throw usage_error("direct_error: reference solution is zero");
  return num / den;
}

// What the tolerance is compared against.
enum class ConvergenceNorm {
  squared,  // tau = <r, r>
  root,     // sqrt(tau)
};

struct SolverConfig {
  double tolerance = 1e-8;
  std::size_t max_iterations = 100000;
  Variant variant = Variant::exblas;
  std::size_t fpe_size = kDefaultFpeSize;
  Topology topology{};
  ConvergenceNorm norm = ConvergenceNorm::squared;

  void validate() const {
    if (!(tolerance > 0.0)) throw usage_error("SolverConfig: tolerance must be > 0");
    if (variant == Variant::opt && (fpe_size < 2 || fpe_size > kMaxFpeSize))
      throw usage_error("SolverConfig: opt variant needs fpe_size in [2, 16]");
    topology.validate();
  }
};

struct SolverResult {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  // tau_0 .. tau_iterations
  std::vector<double> rho_history;       // rho per iteration
  std::vector<double> beta_history;      // beta_0 .. beta_iterations
  std::vector<double> x;
  double direct_error = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool residue_warning = false;
};

[[nodiscard]] inline SolverResult pcg_solve(const CsrMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                                            Schedule& sched, std::span<const double> x_exact = {}) {
  cfg.validate();
  const std::size_t n = a.rows();
  if (b.size() != n) throw usage_error("pcg_solve: right-hand side length mismatch");
  if (!x_exact.empty() && x_exact.size() != n) throw usage_error("pcg_solve: reference solution length mismatch");

  const ReduceOptions ropts{cfg.topology, cfg.fpe_size};
  const std::vector<double> m = jacobi_build(a);
  SolverResult res;
  res.x.assign(n, 0.0);
  std::vector<double> r(n), z(n), d(n), w(n);

  auto converged = [&](double tau) {
    return cfg.norm == ConvergenceNorm::squared ? tau <= cfg.tolerance : std::sqrt(tau) <= cfg.tolerance;
  };
  // beta := <z, r> and tau := <r, r> in one combined reduction phase.
  auto fused = [&](double& beta, double& tau) {
    const std::array<DotTerm, 2> terms{DotTerm{z, r}, DotTerm{r, r}};
    const auto out = reduce_terms(cfg.variant, terms, ropts, sched);
    res.residue_warning = res.residue_warning || out[0].residue_warning || out[1].residue_warning;
    beta = out[0].value;
    tau = out[1].value;
  };

  spmv(a, res.x, w, cfg.topology, sched);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
  jacobi_apply(m, r, z);
  d = z;
  double beta = 0.0, tau = 0.0;
  fused(beta, tau);
  res.residual_history.push_back(tau);
  res.beta_history.push_back(beta);

  std::size_t l = 0;
  while (!converged(tau) && l < cfg.max_iterations) {
    const double beta_prev = beta;
    spmv(a, d, w, cfg.topology, sched);
    const ReduceOutcome dw = reduce_term(cfg.variant, {d, w}, ropts, sched);
    res.residue_warning = res.residue_warning || dw.residue_warning;
    if (!(dw.value > 0.0) || !std::isfinite(dw.value))
      throw breakdown_error("pcg_solve: <d, A d> is not positive; the matrix is not numerically s.p.d.", l);
    const double rho = beta / dw.value;
    axpy_fma(rho, d, res.x);
    axpy_fma(-rho, w, r);
    jacobi_apply(m, r, z);
    fused(beta, tau);
    xpay_fma(beta / beta_prev, z, d);
    ++l;
    res.rho_history.push_back(rho);
    res.beta_history.push_back(beta);
    res.residual_history.push_back(tau);
    if (!std::isfinite(tau)) throw breakdown_error("pcg_solve: residual is not finite", l);
  }
  res.iterations = l;
  res.converged = converged(tau);
  if (!x_exact.empty()) res.direct_error = direct_error(res.x, x_exact);
  return res;
}

[[nodiscard]] inline SolverResult pcg_solve(const CsrMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                                            std::span<const double> x_exact = {}) {
  Schedule sched = Schedule::in_order();
  return pcg_solve(a, b, cfg, sched, x_exact);
}

/// b = A * ones, the right-hand side whose exact solution is all ones.
[[nodiscard]] inline std::vector<double> rhs_from_ones(const CsrMatrix& a) {
  const std::vector<double> ones(a.rows(), 1.0);
  return spmv(a, ones);
}

}  // namespace reprocg
