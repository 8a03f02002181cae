#pragma once

// Synthetic s.p.d. test matrices: the 27-point 3D Poisson stencil, a
// symmetric band matrix, and an ill-conditioned variant of any base matrix
// obtained by symmetric scaling of its first row and column.
//
// The stencil and band coefficients (26/-1 and 2*band+1/-1) are chosen for
// symmetry and strict diagonal dominance at the boundary; they are not
// taken from any reference data set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "reprocg/csr_matrix.hpp"
#include "reprocg/errors.hpp"

namespace reprocg {

[[nodiscard]] inline CsrMatrix gen_poisson27(std::size_t nx, std::size_t ny, std::size_t nz) {
  if (nx < 2 || ny < 2 || nz < 2) throw usage_error("gen_poisson27: every grid dimension must be >= 2");
  constexpr auto kMaxIndex = static_cast<std::size_t>(std::numeric_limits<CsrMatrix::index_type>::max());
  if (nx > kMaxIndex / ny || nx * ny > kMaxIndex / nz) throw usage_error("gen_poisson27: dimension overflow");
  const std::size_t n = nx * ny * nz;
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<CsrMatrix::index_type> cols;
  std::vector<double> vals;
  cols.reserve(27 * n);
  vals.reserve(27 * n);
  std::size_t row = 0;
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i, ++row) {
        // Neighbours in (dk, dj, di) order give ascending column indices.
        for (int dk = -1; dk <= 1; ++dk) {
          if ((dk < 0 && k == 0) || (dk > 0 && k + 1 == nz)) continue;
          for (int dj = -1; dj <= 1; ++dj) {
            if ((dj < 0 && j == 0) || (dj > 0 && j + 1 == ny)) continue;
            for (int di = -1; di <= 1; ++di) {
              if ((di < 0 && i == 0) || (di > 0 && i + 1 == nx)) continue;
              const std::size_t col = (i + di) + nx * ((j + dj) + ny * (k + dk));
              cols.push_back(static_cast<CsrMatrix::index_type>(col));
              vals.push_back(dk == 0 && dj == 0 && di == 0 ? 26.0 : -1.0);
            }
          }
        }
        row_ptr[row + 1] = cols.size();
      }
    }
  }
  return CsrMatrix(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

/// a(i,i) = 2*band + 1 and a(i,j) = -1 for 0 < |i - j| <= band.
[[nodiscard]] inline CsrMatrix gen_band(std::size_t n, std::size_t band) {
  if (band < 1 || band >= n) throw usage_error("gen_band: need 1 <= band < n");
  if (n > static_cast<std::size_t>(std::numeric_limits<CsrMatrix::index_type>::max()))
    throw usage_error("gen_band: dimension overflow");
  const double diag = 2.0 * static_cast<double>(band) + 1.0;
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<CsrMatrix::index_type> cols;
  std::vector<double> vals;
  cols.reserve((2 * band + 1) * n);
  vals.reserve((2 * band + 1) * n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= band ? i - band : 0;
    const std::size_t hi = std::min(n - 1, i + band);
    for (std::size_t j = lo; j <= hi; ++j) {
      cols.push_back(static_cast<CsrMatrix::index_type>(j));
      vals.push_back(j == i ? diag : -1.0);
    }
    row_ptr[i + 1] = cols.size();
  }
  return CsrMatrix(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

/// Expected stored nonzeros of gen_band(n, band).
[[nodiscard]] constexpr std::size_t band_nnz(std::size_t n, std::size_t band) noexcept {
  return (2 * band + 1) * n - band * (band + 1);
}

/// Multiplies the off-diagonal entries of row 0 and column 0 by s and
/// a(0,0) by s*s. Symmetry is preserved exactly (both mirrors see the same
/// product).
[[nodiscard]] inline CsrMatrix scale_first_row_col(const CsrMatrix& base, double s) {
  std::vector<std::size_t> rp(base.row_ptr().begin(), base.row_ptr().end());
  std::vector<CsrMatrix::index_type> ci(base.col_idx().begin(), base.col_idx().end());
  std::vector<double> v(base.values().begin(), base.values().end());
  for (std::size_t i = 0; i < base.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (i == 0 && ci[k] == 0) v[k] *= s * s;
      else if (i == 0 || ci[k] == 0) v[k] *= s;
    }
  }
  return CsrMatrix(base.rows(), std::move(rp), std::move(ci), std::move(v));
}

struct ConditionEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition = 0.0;
};

struct ConditionOptions {
  std::size_t max_power_iterations = 3000;
  std::size_t max_inverse_iterations = 400;
  double relative_change = 1e-9;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

inline double plain_dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::fma(a[i], b[i], s);
  return s;
}

inline void normalize2(std::span<double> v) noexcept {
  const double nrm = std::sqrt(plain_dot(v, v));
  for (double& e : v) e /= nrm;
}

// Jacobi-preconditioned CG used only by the inverse iteration; sequential
// and deterministic. Relative residual target on ||r||_2 / ||b||_2.
inline void inner_solve(const CsrMatrix& a, std::span<const double> b, std::span<double> x, double rtol,
                        std::size_t max_it) {
  const std::size_t n = a.rows();
  std::vector<double> r(b.begin(), b.end()), z(n), d(n), w(n), inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 / a.diagonal(i);
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv[i] * r[i];
  d = z;
  double beta = plain_dot(z, r);
  const double stop = rtol * rtol * plain_dot(b, b);
  for (std::size_t it = 0; it < max_it && plain_dot(r, r) > stop; ++it) {
    spmv(a, d, w);
    const double dw = plain_dot(d, w);
    if (!(dw > 0.0)) break;
    const double rho = beta / dw;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::fma(rho, d[i], x[i]);
      r[i] = std::fma(-rho, w[i], r[i]);
      z[i] = inv[i] * r[i];
    }
    const double beta_new = plain_dot(z, r);
    const double ratio = beta_new / beta;
    beta = beta_new;
    for (std::size_t i = 0; i < n; ++i) d[i] = std::fma(ratio, d[i], z[i]);
  }
}

inline std::vector<double> start_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<double> v(n);
  for (double& e : v) e = static_cast<double>(g() >> 11) * 0x1p-53 + 0.5;
  normalize2(v);
  return v;
}

}  // namespace detail

/// Extreme eigenvalues by power iteration (largest) and inverse power
/// iteration with inner CG solves (smallest). Rayleigh quotients are used
/// as the estimates.
[[nodiscard]] inline ConditionEstimate estimate_condition(const CsrMatrix& a, const ConditionOptions& opts = {}) {
  const std::size_t n = a.rows();
  if (n == 0) throw usage_error("estimate_condition: empty matrix");
  ConditionEstimate est;
  std::vector<double> v = detail::start_vector(n, opts.seed), w(n);
  double lambda = 0.0;
  for (std::size_t it = 0; it < opts.max_power_iterations; ++it) {
    spmv(a, v, w);
    const double next = detail::plain_dot(v, w);
    v.swap(w);
    detail::normalize2(v);
    const bool done = it > 0 && std::abs(next - lambda) <= opts.relative_change * std::abs(next);
    lambda = next;
    if (done) break;
  }
  est.lambda_max = lambda;

  v = detail::start_vector(n, opts.seed ^ 0x9e3779b97f4a7c15ull);
  double mu = 0.0;
  const std::size_t inner_max = std::max<std::size_t>(20 * n, 200);
  for (std::size_t it = 0; it < opts.max_inverse_iterations; ++it) {
    detail::inner_solve(a, v, w, 1e-13, inner_max);
    const double next = detail::plain_dot(v, w);  // Rayleigh quotient of A^{-1}
    v.swap(w);
    detail::normalize2(v);
    const bool done = it > 0 && std::abs(next - mu) <= opts.relative_change * std::abs(next);
    mu = next;
    if (done) break;
  }
  est.lambda_min = 1.0 / mu;
  est.condition = est.lambda_max / est.lambda_min;
  return est;
}

struct IllcondResult {
  CsrMatrix matrix;
  double scale = 1.0;
  double estimated_condition = 0.0;
};

/// Scales the first row and column of `base` until the estimated condition
/// number is within 10% of `target_cond` (bisection on log s).
[[nodiscard]] inline IllcondResult gen_illcond_detailed(const CsrMatrix& base, double target_cond,
                                                        const ConditionOptions& opts = {}) {
  constexpr double kAccept = 0.10;
  constexpr double kAim = 0.03;
  if (!(target_cond >= 1.0) || !std::isfinite(target_cond)) throw usage_error("gen_illcond: bad target condition");
  const double current = estimate_condition(base, opts).condition;
  if (std::abs(current / target_cond - 1.0) <= kAccept) return {base, 1.0, current};
  if (target_cond < current) throw precondition_error("gen_illcond: target below the base condition number");

  auto cond_at = [&](double log_s) { return estimate_condition(scale_first_row_col(base, std::exp(log_s)), opts).condition; };
  double lo = 0.0, hi = 1.0;
  double c_hi = cond_at(hi);
  while (!(c_hi >= target_cond)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 256.0 || !std::isfinite(c_hi)) throw precondition_error("gen_illcond: target condition unattainable");
    c_hi = cond_at(hi);
  }
  double best_log = hi, best_cond = c_hi;
  for (int it = 0; it < 80; ++it) {
    if (std::abs(best_cond / target_cond - 1.0) <= kAim) break;
    const double mid = 0.5 * (lo + hi);
    const double c = cond_at(mid);
    if (std::abs(c / target_cond - 1.0) < std::abs(best_cond / target_cond - 1.0)) {
      best_log = mid;
      best_cond = c;
    }
    if (c < target_cond) lo = mid;
    else hi = mid;
  }
  if (!(std::abs(best_cond / target_cond - 1.0) <= kAccept))
    throw precondition_error("gen_illcond: could not reach the target condition within 10%");
  const double s = std::exp(best_log);
  return {scale_first_row_col(base, s), s, best_cond};
}

[[nodiscard]] inline CsrMatrix gen_illcond(const CsrMatrix& base, double target_cond) {
  return gen_illcond_detailed(base, target_cond).matrix;
}

}  // namespace reprocg
