#pragma once

// Shared fixtures and reference implementations for the test suite. The
// oracles here deliberately avoid the library's kernels.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "qppr/qppr.hpp"

namespace qppr::test {

__extension__ using u128 = unsigned __int128;

/// Random directed graph; `jumpy` concentrates destinations on a few sparse
/// high ids so the aggregator window has to skip many blocks.
inline EdgeList random_edges(std::mt19937_64& gen, std::uint32_t n, double density,
                             bool jumpy = false) {
  EdgeList list;
  list.num_vertices = n;
  std::vector<Vertex> targets;
  if (jumpy) {
    const std::uint32_t hubs = 1 + static_cast<std::uint32_t>(gen() % std::max(1u, n / 6));
    for (std::uint32_t i = 0; i < hubs; ++i) targets.push_back(static_cast<Vertex>(gen() % n));
  }
  std::bernoulli_distribution edge(density);
  for (Vertex s = 0; s < n; ++s) {
    for (Vertex d = 0; d < n; ++d) {
      if (!edge(gen)) continue;
      const Vertex dst = jumpy ? targets[d % targets.size()] : d;
      list.edges.push_back({s, dst});
    }
  }
  return list;
}

/// Random column-stochastic batch (each column sums to about one).
template <class Arith>
RankBatch<Arith> random_batch(std::mt19937_64& gen, const Arith& arith, std::uint32_t n,
                              std::uint32_t kappa) {
  RankBatch<Arith> p(arith, n, kappa);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint32_t k = 0; k < kappa; ++k) {
    std::vector<double> w(n);
    double total = 0.0;
    for (double& v : w) total += (v = u(gen));
    for (Vertex v = 0; v < n; ++v) p.at(v, k) = arith.from_real(w[v] / total);
  }
  return p;
}

/// Dense fixed-point SpMV: W[d][s] holds the raw weight, products are
/// floor(a * b / 2^f) and each destination sums its sources in ascending order.
inline std::vector<std::uint64_t> dense_fixed_spmv(const EdgeList& edges, int f,
                                                   const std::vector<std::uint64_t>& p,
                                                   std::uint32_t kappa) {
  const std::uint32_t n = edges.num_vertices;
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<std::uint64_t> outdeg(n, 0);
  for (const auto& e : edges.edges) {
    if (!adj[e.dst][e.src]) {
      adj[e.dst][e.src] = true;
      ++outdeg[e.src];
    }
  }
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n) * kappa, 0);
  for (Vertex d = 0; d < n; ++d) {
    for (Vertex s = 0; s < n; ++s) {
      if (!adj[d][s]) continue;
      const std::uint64_t w = (std::uint64_t{1} << f) / outdeg[s];
      for (std::uint32_t k = 0; k < kappa; ++k) {
        const u128 prod = static_cast<u128>(w) * p[static_cast<std::size_t>(s) * kappa + k];
        out[static_cast<std::size_t>(d) * kappa + k] += static_cast<std::uint64_t>(prod >> f);
      }
    }
  }
  return out;
}

inline std::vector<double> dense_float_spmv(const EdgeList& edges, const std::vector<double>& p,
                                            std::uint32_t kappa) {
  const std::uint32_t n = edges.num_vertices;
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<double> outdeg(n, 0.0);
  for (const auto& e : edges.edges) {
    if (!adj[e.dst][e.src]) {
      adj[e.dst][e.src] = true;
      outdeg[e.src] += 1.0;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n) * kappa, 0.0);
  for (Vertex d = 0; d < n; ++d) {
    for (Vertex s = 0; s < n; ++s) {
      if (!adj[d][s]) continue;
      for (std::uint32_t k = 0; k < kappa; ++k) {
        out[static_cast<std::size_t>(d) * kappa + k] +=
            p[static_cast<std::size_t>(s) * kappa + k] / outdeg[s];
      }
    }
  }
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("qppr-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

}  // namespace qppr::test
