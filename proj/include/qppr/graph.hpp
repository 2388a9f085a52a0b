#pragma once

// Normalized transition matrix X = (D^-1 A)^T in destination-sorted COO.
//
// Entry (x, y, val) says: with probability val a walker at y moves to x.
// Entries are sorted by (x, y); every entry of a source with out-degree d
// carries val = 1/d in the chosen arithmetic; vertices without out-edges are
// flagged in the dangling bitmap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qppr/arith.hpp"
#include "qppr/error.hpp"

namespace qppr {

using Vertex = std::uint32_t;

struct Edge {
  Vertex src = 0;
  Vertex dst = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeList {
  std::uint32_t num_vertices = 0;
  std::vector<Edge> edges;

  friend bool operator==(const EdgeList&, const EdgeList&) = default;
};

template <class Arith>
class CooGraph {
 public:
  using value_type = typename Arith::value_type;

  /// Takes ownership of already-normalized arrays; the dangling bitmap is
  /// derived from y. Sortedness and values are not checked here (see
  /// validate()), so that files with damaged payloads can still be inspected.
  CooGraph(Arith arith, std::uint32_t num_vertices, std::vector<Vertex> x,
           std::vector<Vertex> y, std::vector<value_type> val)
      : arith_(std::move(arith)),
        num_vertices_(num_vertices),
        x_(std::move(x)),
        y_(std::move(y)),
        val_(std::move(val)),
        dangling_(num_vertices, 1) {
    if (x_.size() != y_.size() || x_.size() != val_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "COO arrays differ in length");
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (x_[i] >= num_vertices_ || y_[i] >= num_vertices_) {
        throw Error(ErrorCode::kVertexOutOfRange,
                    "entry " + std::to_string(i) + " references a vertex >= " +
                        std::to_string(num_vertices_));
      }
      dangling_[y_[i]] = 0;
    }
  }

  const Arith& arith() const noexcept { return arith_; }
  std::uint32_t num_vertices() const noexcept { return num_vertices_; }
  std::size_t num_edges() const noexcept { return x_.size(); }

  std::span<const Vertex> x() const noexcept { return x_; }
  std::span<const Vertex> y() const noexcept { return y_; }
  std::span<const value_type> val() const noexcept { return val_; }

  bool is_dangling(Vertex v) const { return dangling_[v] != 0; }
  std::span<const std::uint8_t> dangling() const noexcept { return dangling_; }

  /// Sources whose 1/outdeg quantized to zero.
  std::size_t underflow_sources() const noexcept { return underflow_sources_; }
  void set_underflow_sources(std::size_t n) noexcept { underflow_sources_ = n; }

 private:
  Arith arith_;
  std::uint32_t num_vertices_;
  std::vector<Vertex> x_;
  std::vector<Vertex> y_;
  std::vector<value_type> val_;
  std::vector<std::uint8_t> dangling_;
  std::size_t underflow_sources_ = 0;
};

/// Sorted by (dst, src) with duplicate arcs collapsed. Self-loops are kept.
inline std::vector<Edge> canonical_edges(const EdgeList& list) {
  if (list.num_vertices == 0) {
    throw Error(ErrorCode::kInvalidArgument, "graph needs at least one vertex");
  }
  std::vector<Edge> edges = list.edges;
  for (const Edge& e : edges) {
    if (e.src >= list.num_vertices || e.dst >= list.num_vertices) {
      throw Error(ErrorCode::kVertexOutOfRange,
                  "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                      " with |V|=" + std::to_string(list.num_vertices));
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
  });
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

template <class Arith>
CooGraph<Arith> normalize(const EdgeList& list, const Arith& arith) {
  const std::vector<Edge> edges = canonical_edges(list);

  std::vector<std::uint64_t> out_degree(list.num_vertices, 0);
  for (const Edge& e : edges) ++out_degree[e.src];

  using value_type = typename Arith::value_type;
  std::vector<value_type> weight(list.num_vertices, arith.zero());
  std::size_t underflow = 0;
  for (Vertex v = 0; v < list.num_vertices; ++v) {
    if (out_degree[v] == 0) continue;
    weight[v] = arith.ratio(1, out_degree[v]);
    if (weight[v] == arith.zero()) ++underflow;
  }

  std::vector<Vertex> x(edges.size()), y(edges.size());
  std::vector<value_type> val(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    x[i] = edges[i].dst;
    y[i] = edges[i].src;
    val[i] = weight[edges[i].src];
  }
  CooGraph<Arith> g(arith, list.num_vertices, std::move(x), std::move(y), std::move(val));
  g.set_underflow_sources(underflow);
  return g;
}

/// Recovers the (deduplicated) arc list from a COO matrix.
template <class Arith>
EdgeList edge_list_of(const CooGraph<Arith>& g) {
  EdgeList list;
  list.num_vertices = g.num_vertices();
  list.edges.reserve(g.num_edges());
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    list.edges.push_back({g.y()[i], g.x()[i]});
  }
  return list;
}

// --- validation -------------------------------------------------------------

enum class IssueKind { kSortViolation, kNormalizationViolation, kDanglingMismatch };

inline std::string_view to_string(IssueKind k) {
  switch (k) {
    case IssueKind::kSortViolation: return "SortViolation";
    case IssueKind::kNormalizationViolation: return "NormalizationViolation";
    case IssueKind::kDanglingMismatch: return "DanglingMismatch";
  }
  return "Unknown";
}

struct Issue {
  IssueKind kind;
  std::string message;
};

struct Diagnostics {
  std::vector<Issue> issues;
  std::size_t underflow_sources = 0;

  bool clean() const { return issues.empty(); }
  bool has(IssueKind k) const {
    return std::any_of(issues.begin(), issues.end(),
                       [k](const Issue& i) { return i.kind == k; });
  }
};

/// Reports sortedness, per-source stochasticity and dangling consistency.
/// Stops listing a category after a handful of hits.
template <class Arith>
Diagnostics validate(const CooGraph<Arith>& g) {
  constexpr std::size_t kMaxPerKind = 8;
  Diagnostics diag;
  diag.underflow_sources = g.underflow_sources();
  std::size_t reported[3] = {0, 0, 0};
  auto report = [&](IssueKind kind, std::string msg) {
    auto& n = reported[static_cast<int>(kind)];
    if (n++ < kMaxPerKind) diag.issues.push_back({kind, std::move(msg)});
  };

  const auto x = g.x();
  const auto y = g.y();
  for (std::size_t i = 1; i < g.num_edges(); ++i) {
    if (x[i] < x[i - 1] || (x[i] == x[i - 1] && y[i] <= y[i - 1])) {
      report(IssueKind::kSortViolation,
             "entry " + std::to_string(i) + " breaks (x, y) ascending order");
    }
  }

  const std::uint32_t n = g.num_vertices();
  std::vector<double> sum(n, 0.0);
  std::vector<std::uint64_t> degree(n, 0);
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    sum[y[i]] += g.arith().to_real(g.val()[i]);
    ++degree[y[i]];
  }
  for (Vertex v = 0; v < n; ++v) {
    if (degree[v] == 0) {
      if (!g.is_dangling(v)) {
        report(IssueKind::kDanglingMismatch,
               "vertex " + std::to_string(v) + " has no out-edges but is not dangling");
      }
      continue;
    }
    if (g.is_dangling(v)) {
      report(IssueKind::kDanglingMismatch,
             "vertex " + std::to_string(v) + " has out-edges but is flagged dangling");
    }
    double lo = 1.0, hi = 1.0;
    if constexpr (Arith::kIsFixed) {
      // Truncation loses less than one ulp per entry.
      lo = 1.0 - static_cast<double>(degree[v]) * g.arith().format().ulp();
    } else {
      const double eps = g.arith().format_bits() == 32 ? 1e-6 : 1e-12;
      lo = 1.0 - eps * static_cast<double>(degree[v]);
      hi = 1.0 + eps * static_cast<double>(degree[v]);
    }
    if (sum[v] < lo || sum[v] > hi) {
      report(IssueKind::kNormalizationViolation,
             "source " + std::to_string(v) + " out-weights sum to " +
                 std::to_string(sum[v]));
    }
  }
  return diag;
}

// --- packet view ------------------------------------------------------------

template <class Arith>
struct Packet {
  std::vector<Vertex> x;
  std::vector<Vertex> y;
  std::vector<typename Arith::value_type> val;
  std::size_t real_entries = 0;
};

/// The COO arrays cut into packets of B entries. The final packet is padded
/// with entries that repeat the last real (x, y) and carry val = 0.
template <class Arith>
class PacketStream {
 public:
  PacketStream(const CooGraph<Arith>& g, std::size_t block)
      : graph_(&g), block_(block) {
    if (block == 0 || (block & (block - 1)) != 0) {
      throw Error(ErrorCode::kInvalidArgument, "packet size must be a power of two");
    }
  }

  const CooGraph<Arith>& graph() const noexcept { return *graph_; }
  std::size_t block() const noexcept { return block_; }
  std::size_t size() const noexcept { return (graph_->num_edges() + block_ - 1) / block_; }

  void fetch(std::size_t index, Packet<Arith>& out) const {
    const std::size_t begin = index * block_;
    const std::size_t end = std::min(begin + block_, graph_->num_edges());
    out.x.resize(block_);
    out.y.resize(block_);
    out.val.resize(block_);
    out.real_entries = end - begin;
    for (std::size_t j = 0; j < out.real_entries; ++j) {
      out.x[j] = graph_->x()[begin + j];
      out.y[j] = graph_->y()[begin + j];
      out.val[j] = graph_->val()[begin + j];
    }
    for (std::size_t j = out.real_entries; j < block_; ++j) {
      out.x[j] = out.x[out.real_entries - 1];
      out.y[j] = out.y[out.real_entries - 1];
      out.val[j] = graph_->arith().zero();
    }
  }

  Packet<Arith> operator[](std::size_t index) const {
    Packet<Arith> p;
    fetch(index, p);
    return p;
  }

 private:
  const CooGraph<Arith>* graph_;
  std::size_t block_;
};

template <class Arith>
PacketStream<Arith> packets(const CooGraph<Arith>& g, std::size_t block = 8) {
  return PacketStream<Arith>(g, block);
}

}  // namespace qppr
