#pragma once

// Unsigned Q1.f fixed point with truncate-toward-zero quantization.
//
// A value is stored as a raw integer `raw` meaning raw * 2^-f. There is one
// integer bit, so the representable range is [0, 2 - 2^-f]. All arithmetic is
// integer-only and saturating; every saturation event is tallied in a
// caller-owned SaturationCounter so overflow never goes unnoticed.

#include <cmath>
#include <cstdint>
#include <string>

#include "qppr/error.hpp"

namespace qppr {

__extension__ using u128 = unsigned __int128;

/// Per-computation tally of saturating operations. Not shared between threads.
struct SaturationCounter {
  std::uint64_t events = 0;
};

class FxFormat {
 public:
  static constexpr int kMinFracBits = 1;
  static constexpr int kMaxFracBits = 62;

  explicit FxFormat(int frac_bits) : frac_bits_(frac_bits) {
    if (frac_bits < kMinFracBits || frac_bits > kMaxFracBits) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fractional bits must be in [1, 62], got " +
                      std::to_string(frac_bits));
    }
  }

  int frac_bits() const noexcept { return frac_bits_; }
  int total_bits() const noexcept { return frac_bits_ + 1; }
  std::uint64_t one_raw() const noexcept { return std::uint64_t{1} << frac_bits_; }
  std::uint64_t max_raw() const noexcept {
    return (std::uint64_t{1} << (frac_bits_ + 1)) - 1;
  }
  double ulp() const noexcept { return std::ldexp(1.0, -frac_bits_); }
  std::string name() const { return "Q1." + std::to_string(frac_bits_); }

  friend bool operator==(FxFormat, FxFormat) = default;

 private:
  int frac_bits_;
};

namespace fx {

inline void require_same(FxFormat a, FxFormat b) {
  if (a != b) {
    throw Error(ErrorCode::kFormatMismatch, a.name() + " vs " + b.name());
  }
}

/// floor(x * 2^f). Scaling by a power of two is exact in binary floating
/// point, so the only rounding is the floor itself.
inline std::uint64_t quantize_raw(double x, FxFormat fmt) {
  if (std::isnan(x) || x < 0.0) {
    throw Error(ErrorCode::kNegativeInput,
                "cannot quantize " + std::to_string(x));
  }
  if (x >= 2.0) {
    throw Error(ErrorCode::kOverflow,
                std::to_string(x) + " is outside [0, 2)");
  }
  return static_cast<std::uint64_t>(std::floor(std::ldexp(x, fmt.frac_bits())));
}

/// floor(num / den * 2^f), exact for integer ratios (no detour through double).
inline std::uint64_t ratio_raw(std::uint64_t num, std::uint64_t den, FxFormat fmt) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
  const u128 scaled = (static_cast<u128>(num) << fmt.frac_bits()) / den;
  if (scaled > fmt.max_raw()) {
    throw Error(ErrorCode::kOverflow, "ratio outside [0, 2)");
  }
  return static_cast<std::uint64_t>(scaled);
}

inline std::uint64_t add_raw(std::uint64_t a, std::uint64_t b, FxFormat fmt,
                             SaturationCounter& sat) {
  // a, b <= 2^63 - 1, so the sum cannot wrap a 64-bit register.
  const std::uint64_t sum = a + b;
  if (sum > fmt.max_raw()) {
    ++sat.events;
    return fmt.max_raw();
  }
  return sum;
}

inline std::uint64_t mul_raw(std::uint64_t a, std::uint64_t b, FxFormat fmt,
                             SaturationCounter& sat) {
  const u128 product = (static_cast<u128>(a) * b) >> fmt.frac_bits();
  if (product > fmt.max_raw()) {
    ++sat.events;
    return fmt.max_raw();
  }
  return static_cast<std::uint64_t>(product);
}

inline double to_real_raw(std::uint64_t raw, FxFormat fmt) {
  return std::ldexp(static_cast<double>(raw), -fmt.frac_bits());
}

}  // namespace fx

/// A fixed-point scalar tagged with its format.
class FxValue {
 public:
  FxValue(std::uint64_t raw, FxFormat fmt) : raw_(raw), fmt_(fmt) {
    if (raw > fmt.max_raw()) {
      throw Error(ErrorCode::kOverflow, "raw value exceeds " + fmt.name());
    }
  }

  std::uint64_t raw() const noexcept { return raw_; }
  FxFormat format() const noexcept { return fmt_; }

  friend bool operator==(const FxValue&, const FxValue&) = default;
  friend bool operator<(const FxValue& a, const FxValue& b) {
    fx::require_same(a.fmt_, b.fmt_);
    return a.raw_ < b.raw_;
  }
  friend bool operator<=(const FxValue& a, const FxValue& b) { return !(b < a); }

 private:
  std::uint64_t raw_;
  FxFormat fmt_;
};

inline FxValue quantize(double x, FxFormat fmt) {
  return FxValue(fx::quantize_raw(x, fmt), fmt);
}

inline FxValue fx_add(const FxValue& a, const FxValue& b, SaturationCounter& sat) {
  fx::require_same(a.format(), b.format());
  return FxValue(fx::add_raw(a.raw(), b.raw(), a.format(), sat), a.format());
}

inline FxValue fx_add(const FxValue& a, const FxValue& b) {
  SaturationCounter sat;
  return fx_add(a, b, sat);
}

inline FxValue fx_mul(const FxValue& a, const FxValue& b, SaturationCounter& sat) {
  fx::require_same(a.format(), b.format());
  return FxValue(fx::mul_raw(a.raw(), b.raw(), a.format(), sat), a.format());
}

inline FxValue fx_mul(const FxValue& a, const FxValue& b) {
  SaturationCounter sat;
  return fx_mul(a, b, sat);
}

/// Exact whenever raw < 2^53, which covers every format up to Q1.52.
inline double to_real(const FxValue& a) { return fx::to_real_raw(a.raw(), a.format()); }

}  // namespace qppr
