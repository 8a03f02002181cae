#pragma once

// Exact reference arithmetic for checking the reproducible kernels.
//
// Every finite binary64 value, and every product of two of them, is an
// integer multiple of 2^-2148, so a GMP integer at that fixed scale holds
// any sum of such terms exactly. Nothing here shares code with the long
// accumulator or the expansions; the final rounding is done bit by bit on
// the big integer. Link against reprocg_oracle (GMP) to use this header.

#include <gmp.h>

#include <algorithm>
#include <bit>
#include <climits>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "reprocg/errors.hpp"

namespace reprocg::oracle {

static_assert(sizeof(unsigned long) == 8, "oracle assumes an LP64 GMP limb interface");

class ExactValue {
 public:
  static constexpr long kScale = 2148;

  ExactValue() { mpz_init(n_); }
  ExactValue(const ExactValue& other) { mpz_init_set(n_, other.n_); }
  ExactValue& operator=(const ExactValue& other) {
    if (this != &other) mpz_set(n_, other.n_);
    return *this;
  }
  ~ExactValue() { mpz_clear(n_); }

  static ExactValue of(double x) {
    ExactValue v;
    v.add(x);
    return v;
  }

  void add(double x) {
    const Parts p = split(x);
    if (p.mant == 0) return;
    Scratch t;
    mpz_set_ui(t.z, p.mant);
    mpz_mul_2exp(t.z, t.z, static_cast<mp_bitcnt_t>(p.exp + kScale));
    if (p.negative) mpz_sub(n_, n_, t.z);
    else mpz_add(n_, n_, t.z);
  }

  // Adds the exact product a*b.
  void add_product(double a, double b) {
    const Parts pa = split(a);
    const Parts pb = split(b);
    if (pa.mant == 0 || pb.mant == 0) return;
    Scratch t;
    mpz_set_ui(t.z, pa.mant);
    mpz_mul_ui(t.z, t.z, pb.mant);
    mpz_mul_2exp(t.z, t.z, static_cast<mp_bitcnt_t>(pa.exp + pb.exp + kScale));
    if (pa.negative != pb.negative) mpz_sub(n_, n_, t.z);
    else mpz_add(n_, n_, t.z);
  }

  void add(const ExactValue& other) { mpz_add(n_, n_, other.n_); }
  void subtract(const ExactValue& other) { mpz_sub(n_, n_, other.n_); }

  [[nodiscard]] int sign() const noexcept { return mpz_sgn(n_); }
  friend bool operator==(const ExactValue& a, const ExactValue& b) { return mpz_cmp(a.n_, b.n_) == 0; }

  /// True when the value is an integer multiple of 2^-1074, the binary64 quantum.
  [[nodiscard]] bool on_binary64_grid() const {
    return mpz_sgn(n_) == 0 || mpz_scan1(n_, 0) >= static_cast<mp_bitcnt_t>(kScale - 1074);
  }

  /// Round to nearest binary64, ties to even. Overflow gives signed infinity.
  [[nodiscard]] double to_double() const {
    const int sgn = mpz_sgn(n_);
    if (sgn == 0) return 0.0;
    Scratch mag;
    mpz_abs(mag.z, n_);
    const auto bits = static_cast<long>(mpz_sizeinbase(mag.z, 2));
    // Keep 53 significant bits, but never go below the 2^-1074 quantum.
    long shift = std::max(bits - 53, kScale - 1074);
    if (shift < 0) shift = 0;
    Scratch q;
    mpz_tdiv_q_2exp(q.z, mag.z, static_cast<mp_bitcnt_t>(shift));
    std::uint64_t kept = mpz_get_ui(q.z);
    if (shift > 0 && mpz_tstbit(mag.z, static_cast<mp_bitcnt_t>(shift - 1))) {
      const bool sticky = shift > 1 && mpz_scan1(mag.z, 0) < static_cast<mp_bitcnt_t>(shift - 1);
      if (sticky || (kept & 1u)) ++kept;
    }
    const long exponent = shift - kScale;
    double out;
    if (exponent > INT_MAX / 2) out = HUGE_VAL;
    else out = std::ldexp(static_cast<double>(kept), static_cast<int>(exponent));
    return sgn < 0 ? -out : out;
  }

  [[nodiscard]] std::string to_string() const {
    char* s = mpz_get_str(nullptr, 10, n_);
    std::string out = std::string(s) + " * 2^-" + std::to_string(kScale);
    void (*free_fn)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &free_fn);
    free_fn(s, std::char_traits<char>::length(s) + 1);
    return out;
  }

 private:
  struct Parts {
    std::uint64_t mant;
    long exp;
    bool negative;
  };
  struct Scratch {
    Scratch() { mpz_init(z); }
    ~Scratch() { mpz_clear(z); }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
    mpz_t z;
  };

  static Parts split(double x) {
    if (!std::isfinite(x)) throw domain_error("oracle: non-finite input");
    const auto bits = std::bit_cast<std::uint64_t>(x);
    const auto biased = static_cast<long>((bits >> 52) & 0x7ff);
    std::uint64_t mant = bits & ((std::uint64_t{1} << 52) - 1);
    long exp = -1074;
    if (biased != 0) {
      mant |= std::uint64_t{1} << 52;
      exp = biased - 1075;
    }
    return {mant, exp, (bits >> 63) != 0};
  }

  mpz_t n_;
};

[[nodiscard]] inline double oracle_dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw usage_error("oracle_dot: length mismatch");
  ExactValue acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add_product(x[i], y[i]);
  return acc.to_double();
}

[[nodiscard]] inline double oracle_sum(std::span<const double> x) {
  ExactValue acc;
  for (double v : x) acc.add(v);
  return acc.to_double();
}

}  // namespace reprocg::oracle
