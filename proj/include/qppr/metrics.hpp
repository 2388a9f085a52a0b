#pragma once

// Ranking-fidelity metrics comparing a candidate ranking against a golden one,
// plus helpers for convergence curves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qppr/error.hpp"
#include "qppr/graph.hpp"
#include "qppr/ppr.hpp"

namespace qppr::metrics {

inline void require_cutoff(std::size_t n, std::size_t a, std::size_t b) {
  if (n > a || n > b) {
    throw Error(ErrorCode::kCutoffTooLarge, "cutoff " + std::to_string(n) +
                                                " exceeds ranking length " +
                                                std::to_string(std::min(a, b)));
  }
}

/// Positions i < n where the two rankings disagree.
inline std::size_t errors_at(std::span<const Vertex> golden, std::span<const Vertex> candidate,
                             std::size_t n) {
  require_cutoff(n, golden.size(), candidate.size());
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n; ++i) errors += golden[i] != candidate[i];
  return errors;
}

/// Unit-cost edits turning the candidate top-n into a sequence whose first n
/// entries are the golden top-n. Entries pushed past position n are dropped
/// for free, so {4,8,6,2} -> {2,4,8,6} costs a single insertion.
inline std::size_t edit_distance_at(std::span<const Vertex> golden,
                                    std::span<const Vertex> candidate, std::size_t n) {
  require_cutoff(n, golden.size(), candidate.size());
  // prev[j]: distance between golden[0, i) and candidate[0, j).
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t substitute = prev[j - 1] + (golden[i - 1] != candidate[j - 1]);
      cur[j] = std::min({substitute, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return *std::min_element(prev.begin(), prev.end());
}

/// Golden order with its inverse permutation, for relevance lookups.
class GoldenRanking {
 public:
  static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

  GoldenRanking(std::vector<Vertex> order, std::uint32_t num_vertices)
      : order_(std::move(order)), position_(num_vertices, kAbsent) {
    for (std::size_t i = 0; i < order_.size(); ++i) {
      if (order_[i] >= num_vertices) {
        throw Error(ErrorCode::kVertexOutOfRange, "golden ranking vertex out of range");
      }
      position_[order_[i]] = static_cast<std::uint32_t>(i);
    }
  }

  std::span<const Vertex> order() const noexcept { return order_; }
  std::uint32_t num_vertices() const noexcept {
    return static_cast<std::uint32_t>(position_.size());
  }
  std::uint32_t position(Vertex v) const { return position_.at(v); }

 private:
  std::vector<Vertex> order_;
  std::vector<std::uint32_t> position_;
};

/// DCG with rel(u) = |V| - golden_position(u) and discount log2(i + 1) for
/// 1-based position i, normalized by the DCG of the golden order itself.
inline double ndcg_at(const GoldenRanking& golden, std::span<const Vertex> candidate,
                      std::size_t n) {
  require_cutoff(n, golden.order().size(), candidate.size());
  const double num_vertices = golden.num_vertices();
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t pos = golden.position(candidate[i]);
    if (pos == GoldenRanking::kAbsent) {
      throw Error(ErrorCode::kMissingRelevance,
                  "vertex " + std::to_string(candidate[i]) + " has no golden rank");
    }
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += (num_vertices - pos) / discount;
    idcg += (num_vertices - static_cast<double>(i)) / discount;
  }
  return idcg > 0.0 ? dcg / idcg : 1.0;
}

inline double ndcg_at(std::span<const Vertex> golden, std::span<const Vertex> candidate,
                      std::size_t n, std::uint32_t num_vertices) {
  return ndcg_at(GoldenRanking({golden.begin(), golden.end()}, num_vertices), candidate, n);
}

/// Overlap of the two top-n sets, ignoring order.
inline double precision_at(std::span<const Vertex> golden, std::span<const Vertex> candidate,
                           std::size_t n) {
  require_cutoff(n, golden.size(), candidate.size());
  if (n == 0) return 1.0;
  std::unordered_set<Vertex> top(golden.begin(), golden.begin() + static_cast<std::ptrdiff_t>(n));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += top.count(candidate[i]);
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Mean absolute score difference over all vertices.
inline double mae(std::span<const double> golden, std::span<const double> candidate) {
  if (golden.size() != candidate.size()) {
    throw Error(ErrorCode::kInvalidArgument, "score vectors differ in length");
  }
  if (golden.empty()) return 0.0;
  long double total = 0.0L;
  for (std::size_t i = 0; i < golden.size(); ++i) {
    total += std::fabs(golden[i] - candidate[i]);
  }
  return static_cast<double>(total / static_cast<long double>(golden.size()));
}

namespace detail {

inline std::uint64_t tie_pairs(std::uint64_t run) { return run * (run - 1) / 2; }

// Sorts v[lo, hi) ascending and returns the number of strict inversions.
inline std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& tmp,
                                 std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, out = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      tmp[out++] = v[j++];
    } else {
      tmp[out++] = v[i++];
    }
  }
  while (i < mid) tmp[out++] = v[i++];
  while (j < hi) tmp[out++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

/// Kendall tau-b between two score vectors over the same items, O(n log n)
/// (Knight's algorithm). Returns 0 when either side is entirely tied.
inline double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "score vectors differ in length");
  }
  const std::size_t n = a.size();
  if (n < 2) return 0.0;

  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t l, std::uint32_t r) {
    return a[l] != a[r] ? a[l] < a[r] : b[l] < b[r];
  });

  const std::uint64_t n0 = detail::tie_pairs(n);
  std::uint64_t ties_a = 0, ties_joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && a[idx[j]] == a[idx[i]]) ++j;
    ties_a += detail::tie_pairs(j - i);
    for (std::size_t s = i; s < j;) {
      std::size_t t = s + 1;
      while (t < j && b[idx[t]] == b[idx[s]]) ++t;
      ties_joint += detail::tie_pairs(t - s);
      s = t;
    }
    i = j;
  }

  std::vector<double> seq(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) seq[i] = b[idx[i]];
  const std::uint64_t swaps = detail::merge_count(seq, tmp, 0, n);

  std::uint64_t ties_b = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && seq[j] == seq[i]) ++j;
    ties_b += detail::tie_pairs(j - i);
    i = j;
  }

  // A single square root keeps the untied case exact: sqrt(n0 * n0) == n0.
  const double denom = static_cast<double>(std::sqrt(static_cast<long double>(n0 - ties_a) *
                                                     static_cast<long double>(n0 - ties_b)));
  if (denom == 0.0) return 0.0;
  const double numer = static_cast<double>(n0) - static_cast<double>(ties_a) -
                       static_cast<double>(ties_b) + static_cast<double>(ties_joint) -
                       2.0 * static_cast<double>(swaps);
  return std::clamp(numer / denom, -1.0, 1.0);
}

// --- reports ----------------------------------------------------------------

/// Golden and candidate results for one request. Orders are best-first; the
/// golden order must cover every vertex so each candidate has a relevance.
struct RankingPair {
  std::vector<Vertex> golden_order;
  std::vector<double> golden_scores;
  std::vector<Vertex> candidate_order;
  std::vector<double> candidate_scores;
};

struct CutoffMetrics {
  std::size_t n = 0;
  std::size_t errors = 0;
  std::size_t edit_distance = 0;
  double ndcg = 0.0;
  double precision = 0.0;
};

struct MetricsReport {
  std::vector<CutoffMetrics> at;
  double ndcg_full = 0.0;
  double mae = 0.0;
  double kendall_tau = 0.0;
};

inline const std::vector<std::size_t>& default_cutoffs() {
  static const std::vector<std::size_t> cutoffs = {10, 20, 50};
  return cutoffs;
}

/// ndcg_full needs a full candidate order; it is left at 0 otherwise.
inline MetricsReport evaluate(const RankingPair& pair, std::span<const std::size_t> cutoffs) {
  const auto num_vertices = static_cast<std::uint32_t>(pair.golden_scores.size());
  const GoldenRanking golden(pair.golden_order, num_vertices);
  MetricsReport report;
  for (std::size_t n : cutoffs) {
    CutoffMetrics m;
    m.n = n;
    m.errors = errors_at(pair.golden_order, pair.candidate_order, n);
    m.edit_distance = edit_distance_at(pair.golden_order, pair.candidate_order, n);
    m.ndcg = ndcg_at(golden, pair.candidate_order, n);
    m.precision = precision_at(pair.golden_order, pair.candidate_order, n);
    report.at.push_back(m);
  }
  if (pair.candidate_order.size() == num_vertices) {
    report.ndcg_full = ndcg_at(golden, pair.candidate_order, num_vertices);
  }
  report.mae = mae(pair.golden_scores, pair.candidate_scores);
  report.kendall_tau = kendall_tau(pair.golden_scores, pair.candidate_scores);
  return report;
}

// --- convergence ------------------------------------------------------------

/// curves[k][t]: L2 step norm of column k after iteration t + 1.
inline std::vector<std::vector<double>> convergence_norms(const ConvergenceTrace& trace) {
  std::vector<std::vector<double>> curves(trace.kappa);
  for (const auto& row : trace.norms) {
    for (std::uint32_t k = 0; k < trace.kappa; ++k) curves[k].push_back(row[k]);
  }
  return curves;
}

/// Keeps the curve up to and including the first point below `floor`.
inline std::vector<double> truncate_below(std::span<const double> curve, double floor) {
  std::vector<double> out;
  for (double v : curve) {
    out.push_back(v);
    if (v < floor) break;
  }
  return out;
}

/// 1-based iteration at which the curve first drops below `threshold`.
inline std::optional<std::size_t> iterations_to_reach(std::span<const double> curve,
                                                      double threshold) {
  for (std::size_t t = 0; t < curve.size(); ++t) {
    if (curve[t] < threshold) return t + 1;
  }
  return std::nullopt;
}

}  // namespace qppr::metrics
