#pragma once

// QCOO binary container, little-endian:
//
//   "QCOO" | version u16 | |V| u64 | |E| u64 | f u8
//   x  u32[|E|] | y u32[|E|] | val u64[|E|] (raw Q1.f) or f64[|E|] when f == 0

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "qppr/graph.hpp"

namespace qppr::qcoo {

inline constexpr std::array<char, 4> kMagic = {'Q', 'C', 'O', 'O'};
inline constexpr std::uint16_t kVersion = 1;

/// File contents before they are bound to an arithmetic.
struct RawCoo {
  std::uint32_t num_vertices = 0;
  std::uint8_t frac_bits = 0;  // 0: float64 payload
  std::vector<Vertex> x;
  std::vector<Vertex> y;
  std::vector<std::uint64_t> raw;  // fixed payload
  std::vector<double> real;        // float payload

  std::size_t num_edges() const { return x.size(); }
  bool is_fixed() const { return frac_bits != 0; }
};

namespace detail {

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint64_t>(static_cast<double>(value));
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <class T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error(ErrorCode::kIo, "truncated QCOO stream");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

template <class Arith>
void write_payload(std::ostream& out, const CooGraph<Arith>& g) {
  for (auto v : g.val()) {
    if constexpr (Arith::kIsFixed) {
      put<std::uint64_t>(out, v);
    } else {
      put<double>(out, static_cast<double>(v));
    }
  }
}

}  // namespace detail

/// Fixed graphs are stored as raw Q1.f; both float arithmetics as float64.
template <class Arith>
void write(std::ostream& out, const CooGraph<Arith>& g) {
  out.write(kMagic.data(), kMagic.size());
  detail::put<std::uint16_t>(out, kVersion);
  detail::put<std::uint64_t>(out, g.num_vertices());
  detail::put<std::uint64_t>(out, g.num_edges());
  std::uint8_t f = 0;
  if constexpr (Arith::kIsFixed) f = static_cast<std::uint8_t>(g.arith().frac_bits());
  detail::put<std::uint8_t>(out, f);
  for (Vertex v : g.x()) detail::put<std::uint32_t>(out, v);
  for (Vertex v : g.y()) detail::put<std::uint32_t>(out, v);
  detail::write_payload(out, g);
  if (!out) throw Error(ErrorCode::kIo, "failed writing QCOO stream");
}

template <class Arith>
void write_file(const std::filesystem::path& path, const CooGraph<Arith>& g) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  write(out, g);
}

inline RawCoo read(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorCode::kBadMagic, "not a QCOO stream");
  const auto version = detail::get<std::uint16_t>(in);
  if (version != kVersion) {
    throw Error(ErrorCode::kBadMagic, "unsupported QCOO version " + std::to_string(version));
  }
  const auto nv = detail::get<std::uint64_t>(in);
  const auto ne = detail::get<std::uint64_t>(in);
  if (nv == 0 || nv > 0xFFFFFFFFull) {
    throw Error(ErrorCode::kBadMagic, "implausible vertex count " + std::to_string(nv));
  }
  RawCoo raw;
  raw.num_vertices = static_cast<std::uint32_t>(nv);
  raw.frac_bits = detail::get<std::uint8_t>(in);
  if (raw.frac_bits > FxFormat::kMaxFracBits) {
    throw Error(ErrorCode::kBadMagic, "invalid format byte " + std::to_string(raw.frac_bits));
  }
  raw.x.resize(ne);
  raw.y.resize(ne);
  for (auto& v : raw.x) v = detail::get<std::uint32_t>(in);
  for (auto& v : raw.y) v = detail::get<std::uint32_t>(in);
  if (raw.is_fixed()) {
    raw.raw.resize(ne);
    for (auto& v : raw.raw) v = detail::get<std::uint64_t>(in);
  } else {
    raw.real.resize(ne);
    for (auto& v : raw.real) v = detail::get<double>(in);
  }
  return raw;
}

inline RawCoo read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read(in);
}

inline CooGraph<FixedArith> as_fixed(const RawCoo& raw) {
  if (!raw.is_fixed()) throw Error(ErrorCode::kFormatMismatch, "QCOO payload is float64");
  return CooGraph<FixedArith>(FixedArith(raw.frac_bits), raw.num_vertices, raw.x, raw.y, raw.raw);
}

inline CooGraph<Float64Arith> as_float64(const RawCoo& raw) {
  if (raw.is_fixed()) throw Error(ErrorCode::kFormatMismatch, "QCOO payload is fixed point");
  return CooGraph<Float64Arith>(Float64Arith{}, raw.num_vertices, raw.x, raw.y, raw.real);
}

/// Topology only; weights are re-derived by normalize().
inline EdgeList edge_list_of(const RawCoo& raw) {
  EdgeList list;
  list.num_vertices = raw.num_vertices;
  list.edges.reserve(raw.num_edges());
  for (std::size_t i = 0; i < raw.num_edges(); ++i) {
    if (raw.x[i] >= raw.num_vertices || raw.y[i] >= raw.num_vertices) {
      throw Error(ErrorCode::kVertexOutOfRange, "entry " + std::to_string(i));
    }
    list.edges.push_back({raw.y[i], raw.x[i]});
  }
  return list;
}

}  // namespace qppr::qcoo
