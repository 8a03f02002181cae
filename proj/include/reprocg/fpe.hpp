#pragma once

// Floating-point expansions: an unevaluated sum of up to p doubles, kept
// ordered by magnitude and grown by cascaded two_sum with early exit.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "reprocg/eft.hpp"
#include "reprocg/errors.hpp"

namespace reprocg {

inline constexpr std::size_t kMaxFpeSize = 16;
inline constexpr std::size_t kDefaultFpeSize = 8;

class Fpe {
 public:
  explicit Fpe(std::size_t size = kDefaultFpeSize) : size_(size) {
    if (size == 0 || size > kMaxFpeSize) throw usage_error("Fpe: size must be in [1, 16]");
  }

  /// Builds an expansion from explicit components (missing slots are zero).
  static Fpe from_components(std::span<const double> components, std::size_t size) {
    if (components.size() > size) throw usage_error("Fpe: more components than slots");
    Fpe out(size);
    std::copy(components.begin(), components.end(), out.c_.begin());
    return out;
  }

  /// Cascades x through the components and returns what is left once every
  /// slot has been visited: 0.0 if x was absorbed. With EarlyExit the cascade
  /// stops as soon as the carried error is exactly zero; every later
  /// two_sum(c, 0) would have been the identity anyway.
  template <bool EarlyExit = true>
  double absorb(double x) noexcept {
    // The leading slots run unconditionally: two_sum(c, 0) is the identity,
    // and skipping the hard-to-predict exit test there is much faster.
    const std::size_t eager = std::min(size_, kEagerSlots);
    std::size_t i = 0;
    for (; i < eager; ++i) {
      const ResultError t = two_sum_unchecked(c_[i], x);
      c_[i] = t.result;
      x = t.error;
    }
    if constexpr (EarlyExit) {
      if (x == 0.0) return 0.0;
    }
    for (; i < size_; ++i) {
      const ResultError t = two_sum_unchecked(c_[i], x);
      c_[i] = t.result;
      x = t.error;
      if constexpr (EarlyExit) {
        if (x == 0.0) return 0.0;
      }
    }
    return x;
  }

  /// Opt-mode accumulation: a carry that does not fit raises the residue flag.
  void accumulate(double x) noexcept {
    if (absorb(x) != 0.0) residue_ = true;
  }

  void clear() noexcept {
    c_.fill(0.0);
    residue_ = false;
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] std::span<const double> components() const noexcept { return {c_.data(), size_}; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return c_[i]; }
  [[nodiscard]] bool residue() const noexcept { return residue_; }
  void flag_residue() noexcept { residue_ = true; }

  // Index one past the last nonzero component.
  [[nodiscard]] std::size_t length() const noexcept {
    std::size_t n = size_;
    while (n > 0 && c_[n - 1] == 0.0) --n;
    return n;
  }

  friend bool bit_equal(const Fpe& a, const Fpe& b) noexcept {
    if (a.size_ != b.size_ || a.residue_ != b.residue_) return false;
    for (std::size_t i = 0; i < a.size_; ++i)
      if (std::bit_cast<std::uint64_t>(a.c_[i]) != std::bit_cast<std::uint64_t>(b.c_[i])) return false;
    return true;
  }

  // Wire layout for the simulated inter-process reduction: size, residue
  // flag, then p little-endian binary64 words.
  [[nodiscard]] std::vector<std::byte> to_bytes() const {
    std::vector<std::byte> out(2 + 8 * size_);
    out[0] = static_cast<std::byte>(size_);
    out[1] = static_cast<std::byte>(residue_ ? 1 : 0);
    for (std::size_t i = 0; i < size_; ++i) {
      auto word = std::bit_cast<std::uint64_t>(c_[i]);
      for (std::size_t b = 0; b < 8; ++b) {
        out[2 + 8 * i + b] = static_cast<std::byte>(word & 0xff);
        word >>= 8;
      }
    }
    return out;
  }

  static Fpe from_bytes(std::span<const std::byte> bytes) {
    if (bytes.size() < 2) throw usage_error("Fpe: truncated message");
    const auto size = std::to_integer<std::size_t>(bytes[0]);
    if (size == 0 || size > kMaxFpeSize || bytes.size() != 2 + 8 * size)
      throw usage_error("Fpe: bad serialized size");
    Fpe out(size);
    out.residue_ = std::to_integer<int>(bytes[1]) != 0;
    for (std::size_t i = 0; i < size; ++i) {
      std::uint64_t word = 0;
      for (std::size_t b = 8; b-- > 0;) word = (word << 8) | std::to_integer<std::uint64_t>(bytes[2 + 8 * i + b]);
      out.c_[i] = std::bit_cast<double>(word);
    }
    return out;
  }

 private:
  friend Fpe renormalize(const Fpe& fpe);

  static constexpr std::size_t kEagerSlots = 3;

  std::array<double, kMaxFpeSize> c_{};
  std::size_t size_;
  bool residue_ = false;
};

[[nodiscard]] inline Fpe accumulate(Fpe fpe, double x) {
  if (!std::isfinite(x)) throw domain_error("accumulate: non-finite addend");
  fpe.accumulate(x);
  return fpe;
}

/// Accumulates b's components into a in index order.
[[nodiscard]] inline Fpe fpe_sum(Fpe a, const Fpe& b) {
  if (a.size() != b.size()) throw usage_error("fpe_sum: expansions of different size");
  // Zeros are not necessarily a suffix here: exact cancellation can empty a
  // leading slot. Accumulating a zero is a no-op, so visit every slot.
  for (std::size_t i = 0; i < b.size(); ++i) a.accumulate(b[i]);
  if (b.residue()) a.flag_residue();
  return a;
}

/// Distills the components with repeated bottom-up two_sum sweeps until a
/// sweep changes nothing. At that fixpoint fl(c[i] + c[i+1]) == c[i] for all
/// i, i.e. |c[i+1]| <= ulp(c[i]) / 2, and zeros form a suffix. The exact
/// value is preserved because every step is an error-free transformation.
[[nodiscard]] inline Fpe renormalize(const Fpe& fpe) {
  Fpe out = fpe;
  auto& c = out.c_;
  const std::size_t n = out.size_;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(c[i])) throw domain_error("renormalize: non-finite component");
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = n; i-- > 1;) {
      const ResultError t = two_sum_unchecked(c[i - 1], c[i]);
      if (std::bit_cast<std::uint64_t>(t.result) != std::bit_cast<std::uint64_t>(c[i - 1]) ||
          std::bit_cast<std::uint64_t>(t.error) != std::bit_cast<std::uint64_t>(c[i])) {
        // -0.0 vs +0.0 only: canonicalize without looping forever.
        if (t.result == c[i - 1] && t.error == c[i] && t.error == 0.0) {
          c[i] = 0.0;
          continue;
        }
        c[i - 1] = t.result;
        c[i] = t.error;
        changed = true;
      }
    }
  }
  return out;
}

namespace detail {

// fl(a + b) rounded to odd: on an inexact sum, step to the neighbour whose
// last significand bit is 1.
inline double add_round_to_odd(double a, double b) noexcept {
  const ResultError t = two_sum_unchecked(a, b);
  if (t.error == 0.0) return t.result;
  if ((std::bit_cast<std::uint64_t>(t.result) & 1u) != 0) return t.result;
  return std::nextafter(t.result, t.error > 0.0 ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity());
}

}  // namespace detail

/// Correctly rounded (nearest, ties to even) value of the exact sum of the
/// components. The expansion is renormalized first, so every tail term sits
/// at least 53 bits below the head; the tail is then folded with
/// round-to-odd, which keeps a sticky bit far below the head's rounding
/// point, and one final round-to-nearest addition produces the result.
/// If the expansion carries a residue the value is still returned; callers
/// must propagate the flag.
[[nodiscard]] inline double round_near_sum(const Fpe& fpe) {
  const Fpe r = renormalize(fpe);
  const std::size_t len = r.length();
  if (len == 0) return 0.0;
  double tail = r[len - 1];
  for (std::size_t i = len - 1; i-- > 1;) tail = detail::add_round_to_odd(r[i], tail);
  return len == 1 ? r[0] : r[0] + tail;
}

}  // namespace reprocg
