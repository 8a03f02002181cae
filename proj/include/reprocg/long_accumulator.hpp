#pragma once

// Kulisch-style long accumulator over the full binary64 summation range.
//
// The exact value is sum_i digits[i] * 2^(52*i - 1074). Each 64-bit signed
// digit carries a 52-bit slice plus 12 carry-safe bits, so up to
// 2^(12-1) - 1 additions can land on a digit before carries must be
// propagated. Negative values use a two's-complement convention: after
// normalization digits 0..D-2 lie in [0, 2^52) and the top digit holds the
// sign, which makes merging two accumulators a plain digit-wise sum.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reprocg/errors.hpp"

namespace reprocg {

class LongAccumulator {
 public:
  static constexpr int kDigitBits = 52;
  static constexpr int kCarryBits = 64 - kDigitBits;
  static constexpr std::size_t kDigitCount = 42;
  static constexpr int kBottomExponent = -1074;
  // Accumulations allowed between normalizations.
  static constexpr std::uint32_t kCarrySafeOps = (std::uint32_t{1} << (kCarryBits - 1)) - 1;
  static constexpr std::size_t kSerializedBytes = kDigitCount * sizeof(std::int64_t);

  enum class Status { exact, overflow };

  LongAccumulator() = default;

  /// Adopts raw (possibly unnormalized) digits, least significant first.
  /// The digits are assumed to be within the carry budget.
  static LongAccumulator from_digits(std::span<const std::int64_t> digits) {
    if (digits.size() != kDigitCount) throw usage_error("LongAccumulator: wrong digit count");
    LongAccumulator acc;
    std::copy(digits.begin(), digits.end(), acc.digits_.begin());
    acc.ops_ = kCarrySafeOps;
    return acc;
  }

  void accumulate(double x) {
    if (!std::isfinite(x)) throw domain_error("LongAccumulator: non-finite addend");
    accumulate_unchecked(x);
  }

  void accumulate_unchecked(double x) noexcept {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    const auto biased = static_cast<unsigned>((bits >> 52) & 0x7ff);
    std::uint64_t mant = bits & kDigitMask;
    if (biased != 0) mant |= std::uint64_t{1} << 52;
    if (mant == 0) return;
    // Bit position of the significand's lsb above 2^-1074.
    const unsigned pos = biased == 0 ? 0u : biased - 1;
    const unsigned index = pos / kDigitBits;
    const unsigned shift = pos % kDigitBits;
    // mant << shift spans at most 104 bits: split it across two digits.
    const auto lo = static_cast<std::int64_t>((mant << shift) & kDigitMask);
    const auto hi = static_cast<std::int64_t>(mant >> (kDigitBits - shift));
    if (static_cast<std::int64_t>(bits) < 0) {
      digits_[index] -= lo;
      digits_[index + 1] -= hi;
    } else {
      digits_[index] += lo;
      digits_[index + 1] += hi;
    }
    if (++ops_ >= kCarrySafeOps) normalize();
  }

  /// Propagates carries; the exact value is unchanged. Sets the overflow
  /// status if the top digit leaves its sign-safe range.
  void normalize() noexcept {
    for (std::size_t i = 0; i + 1 < kDigitCount; ++i) {
      const std::int64_t carry = digits_[i] >> kDigitBits;  // floor division
      digits_[i] -= carry * (std::int64_t{1} << kDigitBits);
      digits_[i + 1] += carry;
    }
    const std::int64_t top = digits_[kDigitCount - 1];
    if (top >= kTopLimit || top < -kTopLimit) status_ = Status::overflow;
    ops_ = 0;
  }

  /// Digit-wise integer sum followed by normalization.
  void merge(const LongAccumulator& other) noexcept {
    if (ops_ != 0) normalize();
    LongAccumulator rhs = other;
    if (rhs.ops_ != 0) rhs.normalize();
    for (std::size_t i = 0; i < kDigitCount; ++i) digits_[i] += rhs.digits_[i];
    if (rhs.status_ == Status::overflow) status_ = Status::overflow;
    normalize();
  }

  /// Correctly rounded (nearest, ties to even) binary64 value. Values past
  /// the binary64 range round to a signed infinity.
  [[nodiscard]] double round() const {
    LongAccumulator acc = *this;
    if (acc.ops_ != 0) acc.normalize();
    if (acc.status_ == Status::overflow) throw overflow_error("LongAccumulator: fixed-point range exceeded");
    bool negative = false;
    if (acc.digits_[kDigitCount - 1] < 0) {
      negative = true;
      for (auto& d : acc.digits_) d = -d;
      acc.normalize();
    }
    const double magnitude = acc.round_nonnegative();
    return negative ? -magnitude : magnitude;
  }

  [[nodiscard]] bool is_zero() const noexcept {
    LongAccumulator acc = *this;
    acc.normalize();
    return std::all_of(acc.digits_.begin(), acc.digits_.end(), [](std::int64_t d) { return d == 0; });
  }

  [[nodiscard]] std::span<const std::int64_t, kDigitCount> digits() const noexcept { return digits_; }
  [[nodiscard]] std::uint32_t ops_since_normalize() const noexcept { return ops_; }
  [[nodiscard]] Status status() const noexcept { return status_; }

  /// Little-endian two's-complement digits, least significant digit first.
  [[nodiscard]] std::vector<std::byte> to_bytes() const {
    std::vector<std::byte> out(kSerializedBytes);
    for (std::size_t i = 0; i < kDigitCount; ++i) {
      auto word = static_cast<std::uint64_t>(digits_[i]);
      for (std::size_t b = 0; b < 8; ++b) {
        out[i * 8 + b] = static_cast<std::byte>(word & 0xff);
        word >>= 8;
      }
    }
    return out;
  }

  /// Inverse of to_bytes. The result is normalized on arrival.
  static LongAccumulator from_bytes(std::span<const std::byte> bytes) {
    if (bytes.size() != kSerializedBytes) throw usage_error("LongAccumulator: bad serialized size");
    LongAccumulator acc;
    for (std::size_t i = 0; i < kDigitCount; ++i) {
      std::uint64_t word = 0;
      for (std::size_t b = 8; b-- > 0;) word = (word << 8) | std::to_integer<std::uint64_t>(bytes[i * 8 + b]);
      acc.digits_[i] = static_cast<std::int64_t>(word);
    }
    acc.normalize();
    return acc;
  }

 private:
  static constexpr std::uint64_t kDigitMask = (std::uint64_t{1} << kDigitBits) - 1;
  static constexpr std::int64_t kTopLimit = std::int64_t{1} << (kDigitBits - 1);

  // Bit `pos` of the normalized nonnegative value (pos 0 weighs 2^-1074).
  [[nodiscard]] unsigned bit(std::size_t pos) const noexcept {
    std::size_t index = pos / kDigitBits;
    std::size_t offset = pos % kDigitBits;
    if (index >= kDigitCount) {
      offset += (index - (kDigitCount - 1)) * kDigitBits;
      index = kDigitCount - 1;
      if (offset >= 63) return 0;
    }
    return static_cast<unsigned>((static_cast<std::uint64_t>(digits_[index]) >> offset) & 1u);
  }

  // Any bit strictly below `pos` set?
  [[nodiscard]] bool any_below(std::size_t pos) const noexcept {
    const std::size_t full = pos / kDigitBits;
    for (std::size_t i = 0; i < full && i < kDigitCount; ++i)
      if (digits_[i] != 0) return true;
    const std::size_t rem = pos % kDigitBits;
    if (full < kDigitCount && rem != 0) {
      const auto mask = (std::uint64_t{1} << rem) - 1;
      if ((static_cast<std::uint64_t>(digits_[full]) & mask) != 0) return true;
    }
    return false;
  }

  [[nodiscard]] double round_nonnegative() const noexcept {
    std::size_t top = kDigitCount;
    while (top > 0 && digits_[top - 1] == 0) --top;
    if (top == 0) return 0.0;
    const auto lead_digit = static_cast<std::uint64_t>(digits_[top - 1]);
    const std::size_t lead = (top - 1) * kDigitBits + (63 - std::countl_zero(lead_digit));
    // Keep 53 bits, or everything down to 2^-1074 for subnormal results.
    const std::size_t low = lead >= 52 ? lead - 52 : 0;
    std::uint64_t q = 0;
    for (std::size_t p = lead + 1; p-- > low;) q = (q << 1) | bit(p);
    if (low > 0 && bit(low - 1) != 0) {
      if (any_below(low - 1) || (q & 1u) != 0) ++q;
    }
    return std::ldexp(static_cast<double>(q), static_cast<int>(low) + kBottomExponent);
  }

  std::array<std::int64_t, kDigitCount> digits_{};
  std::uint32_t ops_ = 0;
  Status status_ = Status::exact;
};

}  // namespace reprocg
