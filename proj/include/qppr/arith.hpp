#pragma once

// Arithmetic policies shared by the graph, SpMV and PPR templates.
//
// FixedArith   Q1.f raw integers, truncating and saturating.
// Float32Arith IEEE binary32, the F32 comparison arm.
// Float64Arith IEEE binary64, the golden reference.

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

#include "qppr/fixed_point.hpp"

namespace qppr {

class FixedArith {
 public:
  using value_type = std::uint64_t;
  static constexpr bool kIsFixed = true;

  explicit FixedArith(FxFormat fmt) : fmt_(fmt) {}
  explicit FixedArith(int frac_bits) : fmt_(frac_bits) {}

  FxFormat format() const noexcept { return fmt_; }
  int frac_bits() const noexcept { return fmt_.frac_bits(); }
  int format_bits() const noexcept { return fmt_.total_bits(); }
  std::string name() const { return fmt_.name(); }

  value_type zero() const noexcept { return 0; }
  value_type one() const noexcept { return fmt_.one_raw(); }
  value_type from_real(double x) const { return fx::quantize_raw(x, fmt_); }
  value_type ratio(std::uint64_t num, std::uint64_t den) const {
    return fx::ratio_raw(num, den, fmt_);
  }
  double to_real(value_type v) const { return fx::to_real_raw(v, fmt_); }

  value_type add(value_type a, value_type b, SaturationCounter& sat) const {
    return fx::add_raw(a, b, fmt_, sat);
  }
  value_type mul(value_type a, value_type b, SaturationCounter& sat) const {
    return fx::mul_raw(a, b, fmt_, sat);
  }

  friend bool operator==(const FixedArith&, const FixedArith&) = default;

 private:
  FxFormat fmt_;
};

template <class T, int Bits>
class FloatArith {
 public:
  using value_type = T;
  static constexpr bool kIsFixed = false;

  int format_bits() const noexcept { return Bits; }
  std::string name() const { return Bits == 32 ? "F32" : "F64"; }

  value_type zero() const noexcept { return T{0}; }
  value_type one() const noexcept { return T{1}; }
  value_type from_real(double x) const { return static_cast<T>(x); }
  value_type ratio(std::uint64_t num, std::uint64_t den) const {
    return static_cast<T>(num) / static_cast<T>(den);
  }
  double to_real(value_type v) const { return static_cast<double>(v); }

  value_type add(value_type a, value_type b, SaturationCounter&) const { return a + b; }
  value_type mul(value_type a, value_type b, SaturationCounter&) const { return a * b; }

  friend bool operator==(const FloatArith&, const FloatArith&) = default;
};

using Float32Arith = FloatArith<float, 32>;
using Float64Arith = FloatArith<double, 64>;

/// Run-time format selection for sweeps.
using AnyArith = std::variant<FixedArith, Float32Arith, Float64Arith>;

inline int format_bits(const AnyArith& a) {
  return std::visit([](const auto& x) { return x.format_bits(); }, a);
}

inline std::string format_name(const AnyArith& a) {
  return std::visit([](const auto& x) { return x.name(); }, a);
}

/// Parses "19" (Q1.19), "f32" or "f64".
inline AnyArith parse_format(const std::string& token) {
  if (token == "f32" || token == "F32" || token == "float") return Float32Arith{};
  if (token == "f64" || token == "F64" || token == "double") return Float64Arith{};
  std::size_t used = 0;
  int bits = 0;
  try {
    bits = std::stoi(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || token.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown format '" + token + "'");
  }
  return FixedArith(FxFormat(bits));
}

}  // namespace qppr
