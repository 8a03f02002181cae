#pragma once

// Error-free transformations for binary64 addition and multiplication.
//
// Everything downstream (expansions, long accumulators, the reproducible
// reductions) is only as exact as these two kernels, so the build refuses
// configurations that would silently change their rounding behaviour.

#include <bit>
#include <cfenv>
#include <cmath>
#include <cstdint>

#include "reprocg/errors.hpp"

#if !defined(__FMA__) && !defined(FP_FAST_FMA)
#error "reprocg needs a hardware fused multiply-add; compile with -mfma or a matching -march"
#endif
#if defined(__FAST_MATH__)
#error "reprocg cannot be compiled with -ffast-math: it reassociates the error-free transformations"
#endif

namespace reprocg {

// r = fl(op(a, b)) and the exact rounding error e, so that r + e == op(a, b).
struct ResultError {
  double result = 0.0;
  double error = 0.0;
};

/// Knuth's branch-free two_sum. No magnitude test, no branches; exact for
/// any pair of finite operands whose rounded sum does not overflow.
[[nodiscard]] inline ResultError two_sum_unchecked(double a, double b) noexcept {
  const double r = a + b;
  const double z = r - a;
  const double s = (a - (r - z)) + (b - z);
  return {r, s};
}

[[nodiscard]] inline ResultError two_prod_unchecked(double a, double b) noexcept {
  const double r = a * b;
  return {r, std::fma(a, b, -r)};
}

namespace detail {

// Exponent of the lowest set bit of a nonzero finite x, i.e. x = odd * 2^k.
inline int lowest_bit_exponent(double x) noexcept {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const auto biased = static_cast<int>((bits >> 52) & 0x7ff);
  std::uint64_t mant = bits & ((std::uint64_t{1} << 52) - 1);
  int exp = -1074;
  if (biased != 0) {
    mant |= std::uint64_t{1} << 52;
    exp = biased - 1075;
  }
  return exp + std::countr_zero(mant);
}

}  // namespace detail

[[nodiscard]] inline ResultError two_sum(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw domain_error("two_sum: non-finite operand");
  const ResultError out = two_sum_unchecked(a, b);
  if (!std::isfinite(out.result)) throw overflow_error("two_sum: rounded sum overflows");
  return out;
}

/// Product error-free transformation via fma. The error term is exact only
/// while the exact product keeps all of its bits at or above 2^-1074; below
/// that a range_error is raised instead of returning an inexact pair.
[[nodiscard]] inline ResultError two_prod(double a, double b) {
  const ResultError out = two_prod_unchecked(a, b);
  // |r| >= 2^-969 implies ea + eb >= -1074 for the operands' lowest bits.
  const double mag = std::abs(out.result);
  if (mag >= 0x1p-969 && mag <= 0x1.fffffffffffffp+1023) [[likely]]
    return out;
  if (!std::isfinite(a) || !std::isfinite(b)) throw domain_error("two_prod: non-finite operand");
  if (!std::isfinite(out.result)) throw overflow_error("two_prod: rounded product overflows");
  if (a != 0.0 && b != 0.0 &&
      detail::lowest_bit_exponent(a) + detail::lowest_bit_exponent(b) < -1074) {
    throw range_error("two_prod: product underflows, error term is not representable");
  }
  return out;
}

// The kernels assume round-to-nearest-even and never change the mode.
[[nodiscard]] inline bool rounding_mode_is_nearest() noexcept {
  return std::fegetround() == FE_TONEAREST;
}

}  // namespace reprocg
