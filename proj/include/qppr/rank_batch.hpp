#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qppr/arith.hpp"
#include "qppr/graph.hpp"

namespace qppr {

/// |V| x kappa score matrix, one column per personalization vertex.
/// Stored vertex-major so that the kappa scores of a vertex are contiguous.
template <class Arith>
struct RankBatch {
  using value_type = typename Arith::value_type;

  Arith arith;
  std::uint32_t num_vertices = 0;
  std::uint32_t kappa = 0;
  std::vector<value_type> values;
  std::vector<Vertex> personalization;

  RankBatch(Arith a, std::uint32_t n, std::uint32_t k)
      : arith(std::move(a)), num_vertices(n), kappa(k),
        values(static_cast<std::size_t>(n) * k, arith.zero()) {}

  value_type& at(Vertex v, std::uint32_t k) {
    return values[static_cast<std::size_t>(v) * kappa + k];
  }
  const value_type& at(Vertex v, std::uint32_t k) const {
    return values[static_cast<std::size_t>(v) * kappa + k];
  }

  std::span<value_type> row(Vertex v) {
    return {values.data() + static_cast<std::size_t>(v) * kappa, kappa};
  }
  std::span<const value_type> row(Vertex v) const {
    return {values.data() + static_cast<std::size_t>(v) * kappa, kappa};
  }

  /// Column k as real numbers.
  std::vector<double> column(std::uint32_t k) const {
    std::vector<double> out(num_vertices);
    for (Vertex v = 0; v < num_vertices; ++v) out[v] = arith.to_real(at(v, k));
    return out;
  }
};

}  // namespace qppr
