#pragma once

// Batched Personalized PageRank:
//
//   P <- alpha * X P + (alpha / |V|) (d . P) 1 + (1 - alpha) V
//
// with one one-hot personalization column per request. In fixed-point mode
// the constants alpha, 1 - alpha and alpha / |V| are quantized once when the
// engine is built.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qppr/graph.hpp"
#include "qppr/rank_batch.hpp"
#include "qppr/spmv.hpp"

namespace qppr {

/// Vertex capacity of the on-chip score buffers: roughly 20M 32-bit values.
inline constexpr std::uint64_t kDefaultVertexCapacity = 20'000'000;

enum class SpmvKernel { kStream, kReference };

struct PprConfig {
  double alpha = 0.85;
  int max_iter = 10;
  std::uint32_t kappa = 8;
  double convergence_eps = 1e-6;
  bool early_stop = false;
  bool track_convergence = true;
  bool fail_on_saturation = true;
  std::size_t block = 8;
  SpmvKernel kernel = SpmvKernel::kStream;
  std::uint64_t vertex_capacity = kDefaultVertexCapacity;

  void check() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
    }
    if (max_iter < 0) throw Error(ErrorCode::kInvalidArgument, "negative iteration count");
    if (kappa == 0) throw Error(ErrorCode::kInvalidArgument, "kappa must be >= 1");
  }
};

/// Per-iteration diagnostics; row t describes the iterate after step t + 1.
struct ConvergenceTrace {
  std::uint32_t kappa = 0;
  std::vector<std::vector<double>> norms;  // ||p_{t+1} - p_t||_2 per column
  std::vector<std::vector<double>> mass;   // column sums of p_{t+1}

  std::size_t iterations() const { return norms.size(); }
  double max_norm(std::size_t t) const {
    return *std::max_element(norms[t].begin(), norms[t].end());
  }
};

template <class Arith>
struct PprResult {
  RankBatch<Arith> ranks;
  ConvergenceTrace trace;
  std::uint64_t saturations = 0;
  int iterations = 0;
};

template <class Arith>
class PprEngine {
 public:
  using value_type = typename Arith::value_type;

  PprEngine(const CooGraph<Arith>& g, PprConfig config)
      : graph_(&g), config_(config), spmv_(g, config.block) {
    config_.check();
    if (g.num_vertices() > config_.vertex_capacity) {
      throw Error(ErrorCode::kCapacityExceeded,
                  std::to_string(g.num_vertices()) + " vertices exceed capacity " +
                      std::to_string(config_.vertex_capacity));
    }
    const Arith& a = g.arith();
    alpha_ = a.from_real(config_.alpha);
    one_minus_alpha_ = a.from_real(1.0 - config_.alpha);
    alpha_over_n_ = a.from_real(config_.alpha / static_cast<double>(g.num_vertices()));
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      if (g.is_dangling(v)) dangling_.push_back(v);
    }
  }

  const PprConfig& config() const noexcept { return config_; }
  const CooGraph<Arith>& graph() const noexcept { return *graph_; }
  std::uint64_t saturations() const noexcept { return sat_.events; }

  value_type alpha() const noexcept { return alpha_; }
  value_type one_minus_alpha() const noexcept { return one_minus_alpha_; }
  value_type alpha_over_n() const noexcept { return alpha_over_n_; }

  /// One-hot columns: P[v_k, k] = 1.
  RankBatch<Arith> init(std::span<const Vertex> ids) const {
    const std::uint32_t n = graph_->num_vertices();
    if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "no personalization vertices");
    std::unordered_set<Vertex> seen;
    for (Vertex v : ids) {
      if (v >= n) {
        throw Error(ErrorCode::kVertexOutOfRange,
                    "personalization vertex " + std::to_string(v) + " with |V|=" +
                        std::to_string(n));
      }
      if (!seen.insert(v).second) {
        throw Error(ErrorCode::kDuplicateVertex, "vertex " + std::to_string(v) + " repeated");
      }
    }
    RankBatch<Arith> p(graph_->arith(), n, static_cast<std::uint32_t>(ids.size()));
    p.personalization.assign(ids.begin(), ids.end());
    for (std::uint32_t k = 0; k < p.kappa; ++k) p.at(ids[k], k) = graph_->arith().one();
    return p;
  }

  /// s_k = (alpha / |V|) * sum of column k over dangling vertices.
  std::vector<value_type> scaling(const RankBatch<Arith>& p) {
    detail::require_compatible(*graph_, p);
    const Arith& a = graph_->arith();
    std::vector<value_type> s(p.kappa, a.zero());
    if constexpr (Arith::kIsFixed) {
      // One wide accumulator, one truncation at the end.
      std::vector<u128> total(p.kappa, 0);
      for (Vertex v : dangling_) {
        const auto row = p.row(v);
        for (std::uint32_t k = 0; k < p.kappa; ++k) total[k] += row[k];
      }
      const int f = a.frac_bits();
      const u128 max_raw = a.format().max_raw();
      for (std::uint32_t k = 0; k < p.kappa; ++k) {
        // alpha_over_n < 2^f and total < |V| 2^(f+1): the product fits 128 bits.
        const u128 product = (static_cast<u128>(alpha_over_n_) * total[k]) >> f;
        if (product > max_raw) {
          ++sat_.events;
          s[k] = static_cast<value_type>(max_raw);
        } else {
          s[k] = static_cast<value_type>(product);
        }
      }
    } else {
      std::vector<value_type> total(p.kappa, a.zero());
      for (Vertex v : dangling_) {
        const auto row = p.row(v);
        for (std::uint32_t k = 0; k < p.kappa; ++k) total[k] = a.add(total[k], row[k], sat_);
      }
      for (std::uint32_t k = 0; k < p.kappa; ++k) s[k] = a.mul(alpha_over_n_, total[k], sat_);
    }
    return s;
  }

  /// out = alpha * X p + s + (1 - alpha) V.
  void step(const RankBatch<Arith>& p, RankBatch<Arith>& out) {
    const std::uint64_t before = sat_.events;
    const std::vector<value_type> s = scaling(p);
    if (config_.kernel == SpmvKernel::kStream) {
      spmv_.run(p, out, sat_);
    } else {
      spmv_reference(*graph_, p, out, sat_);
    }
    const Arith& a = graph_->arith();
    const std::uint32_t kappa = p.kappa;
    for (Vertex v = 0; v < p.num_vertices; ++v) {
      auto row = out.row(v);
      for (std::uint32_t k = 0; k < kappa; ++k) {
        row[k] = a.add(a.mul(alpha_, row[k], sat_), s[k], sat_);
      }
    }
    for (std::uint32_t k = 0; k < kappa; ++k) {
      auto& cell = out.at(p.personalization[k], k);
      cell = a.add(cell, one_minus_alpha_, sat_);
    }
    if (config_.fail_on_saturation && sat_.events != before) {
      throw Error(ErrorCode::kSaturationDetected,
                  std::to_string(sat_.events - before) + " saturating operations in one step");
    }
  }

  RankBatch<Arith> step(const RankBatch<Arith>& p) {
    RankBatch<Arith> out(p.arith, p.num_vertices, p.kappa);
    step(p, out);
    return out;
  }

  PprResult<Arith> run(std::span<const Vertex> ids) {
    PprResult<Arith> result{init(ids), {}, 0, 0};
    result.trace.kappa = result.ranks.kappa;
    RankBatch<Arith> next(result.ranks.arith, result.ranks.num_vertices, result.ranks.kappa);
    for (int t = 0; t < config_.max_iter; ++t) {
      step(result.ranks, next);
      ++result.iterations;
      bool converged = false;
      if (config_.track_convergence || config_.early_stop) {
        auto norms = difference_norms(next, result.ranks);
        converged = std::all_of(norms.begin(), norms.end(),
                                [&](double d) { return d < config_.convergence_eps; });
        result.trace.norms.push_back(std::move(norms));
        result.trace.mass.push_back(column_sums(next));
      }
      std::swap(result.ranks, next);
      if (config_.early_stop && converged) break;
    }
    result.saturations = sat_.events;
    return result;
  }

 private:
  std::vector<double> difference_norms(const RankBatch<Arith>& a,
                                       const RankBatch<Arith>& b) const {
    std::vector<double> sq(a.kappa, 0.0);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      double d;
      if constexpr (Arith::kIsFixed) {
        const auto diff = static_cast<std::int64_t>(a.values[i]) -
                          static_cast<std::int64_t>(b.values[i]);
        d = std::ldexp(static_cast<double>(diff), -a.arith.frac_bits());
      } else {
        d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
      }
      sq[i % a.kappa] += d * d;
    }
    for (double& v : sq) v = std::sqrt(v);
    return sq;
  }

  static std::vector<double> column_sums(const RankBatch<Arith>& p) {
    std::vector<long double> acc(p.kappa, 0.0L);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      acc[i % p.kappa] += static_cast<long double>(p.arith.to_real(p.values[i]));
    }
    return {acc.begin(), acc.end()};
  }

  const CooGraph<Arith>* graph_;
  PprConfig config_;
  StreamingSpmv<Arith> spmv_;
  SaturationCounter sat_;
  value_type alpha_{};
  value_type one_minus_alpha_{};
  value_type alpha_over_n_{};
  std::vector<Vertex> dangling_;
};

template <class Arith>
PprResult<Arith> run_ppr(const CooGraph<Arith>& g, const PprConfig& config,
                         std::span<const Vertex> ids) {
  PprEngine<Arith> engine(g, config);
  return engine.run(ids);
}

/// Top-n vertices of column k: score descending, ties by ascending id.
template <class Arith>
std::vector<Vertex> rank(const RankBatch<Arith>& p, std::uint32_t k, std::size_t n) {
  if (k >= p.kappa) throw Error(ErrorCode::kInvalidArgument, "column out of range");
  if (n > p.num_vertices) {
    throw Error(ErrorCode::kCutoffTooLarge, "cannot take top " + std::to_string(n) +
                                                " of " + std::to_string(p.num_vertices));
  }
  std::vector<Vertex> order(p.num_vertices);
  std::iota(order.begin(), order.end(), Vertex{0});
  auto better = [&](Vertex a, Vertex b) {
    const auto sa = p.at(a, k), sb = p.at(b, k);
    return sa != sb ? sa > sb : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    better);
  order.resize(n);
  return order;
}

/// Same ordering rule over plain real scores.
inline std::vector<Vertex> rank_scores(std::span<const double> scores, std::size_t n) {
  if (n > scores.size()) throw Error(ErrorCode::kCutoffTooLarge, "cutoff exceeds |V|");
  std::vector<Vertex> order(scores.size());
  std::iota(order.begin(), order.end(), Vertex{0});
  auto better = [&](Vertex a, Vertex b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  };
  if (n == scores.size()) {
    std::sort(order.begin(), order.end(), better);
  } else {
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n),
                      order.end(), better);
    order.resize(n);
  }
  return order;
}

}  // namespace qppr
