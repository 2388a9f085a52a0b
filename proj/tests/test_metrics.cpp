#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace qppr;
using namespace qppr::metrics;

namespace {

using Seq = std::vector<Vertex>;

// Plain recursive Levenshtein over prefixes, memoized.
std::size_t levenshtein(const Seq& a, const Seq& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) {
    if (i == 0) return j;
    if (j == 0) return i;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t best =
        std::min({d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1])});
    memo[key] = best;
    return best;
  };
  return d(a.size(), b.size());
}

// Edit the candidate top-n until the golden top-n is its prefix; anything
// pushed past position n is discarded.
std::size_t prefix_edit_oracle(const Seq& golden, const Seq& candidate, std::size_t n) {
  const Seq g(golden.begin(), golden.begin() + static_cast<std::ptrdiff_t>(n));
  std::size_t best = n;
  for (std::size_t j = 0; j <= n; ++j) {
    const Seq c(candidate.begin(), candidate.begin() + static_cast<std::ptrdiff_t>(j));
    best = std::min(best, levenshtein(g, c));
  }
  return best;
}

double kendall_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ++ties_a;
      } else if (db == 0) {
        ++ties_b;
      } else if ((da > 0) == (db > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double denom = std::sqrt(static_cast<double>(concordant + discordant + ties_a)) *
                       std::sqrt(static_cast<double>(concordant + discordant + ties_b));
  return denom == 0 ? 0.0 : (concordant - discordant) / denom;
}

Seq permutation(std::mt19937_64& gen, std::size_t n) {
  Seq p(n);
  std::iota(p.begin(), p.end(), Vertex{0});
  std::shuffle(p.begin(), p.end(), gen);
  return p;
}

}  // namespace

TEST(Errors, WorkedExample) {
  const Seq golden = {2, 4, 8, 6}, candidate = {4, 8, 6, 2};
  EXPECT_EQ(errors_at(golden, candidate, 4), 4u);
  EXPECT_EQ(errors_at(golden, golden, 4), 0u);
  Seq a(10), b(10);
  std::iota(a.begin(), a.end(), Vertex{0});
  std::iota(b.begin(), b.end(), Vertex{10});
  EXPECT_EQ(errors_at(a, b, 10), 10u);
  EXPECT_THROW(errors_at(golden, candidate, 5), Error);
}

TEST(EditDistance, WorkedExample) {
  const Seq golden = {2, 4, 8, 6}, candidate = {4, 8, 6, 2};
  EXPECT_EQ(edit_distance_at(golden, candidate, 4), 1u);
  EXPECT_EQ(edit_distance_at(golden, golden, 4), 0u);
  try {
    edit_distance_at(golden, candidate, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCutoffTooLarge);
  }
}

TEST(EditDistance, MatchesRecursiveOracle) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t universe = 4 + gen() % 8;
    const Seq golden = permutation(gen, universe);
    const Seq candidate = permutation(gen, universe);
    const std::size_t n = 1 + gen() % std::min<std::size_t>(universe, 8);
    const std::size_t d = edit_distance_at(golden, candidate, n);
    ASSERT_EQ(d, prefix_edit_oracle(golden, candidate, n));
    ASSERT_LE(d, errors_at(golden, candidate, n));
    ASSERT_LE(errors_at(golden, candidate, n), n);
  }
}

TEST(Ndcg, HandEvaluatedPair) {
  const Seq golden = {0, 1}, candidate = {1, 0};
  const double l3 = std::log2(3.0);
  const double expected = (1.0 + 2.0 / l3) / (2.0 + 1.0 / l3);
  EXPECT_NEAR(ndcg_at(golden, candidate, 2, 2), expected, 1e-15);
  EXPECT_NEAR(ndcg_at(golden, candidate, 2, 2), 0.8597, 1e-4);
  EXPECT_EQ(ndcg_at(golden, golden, 2, 2), 1.0);
}

TEST(Ndcg, BoundedAndRelabelInvariant) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 60;
    const Seq golden = permutation(gen, n), candidate = permutation(gen, n);
    const std::size_t cut = 1 + gen() % n;
    const auto v = static_cast<std::uint32_t>(n);
    const double score = ndcg_at(golden, candidate, cut, v);
    ASSERT_GE(score, 0.0);
    ASSERT_LE(score, 1.0);
    const Seq relabel = permutation(gen, n);
    Seq g2, c2;
    for (Vertex u : golden) g2.push_back(relabel[u]);
    for (Vertex u : candidate) c2.push_back(relabel[u]);
    ASSERT_DOUBLE_EQ(ndcg_at(g2, c2, cut, v), score);
    ASSERT_DOUBLE_EQ(precision_at(g2, c2, cut), precision_at(golden, candidate, cut));
  }
}

TEST(Ndcg, MissingRelevance) {
  const Seq golden = {0, 1}, candidate = {0, 2};
  try {
    ndcg_at(golden, candidate, 2, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingRelevance);
  }
}

TEST(Precision, Overlap) {
  Seq a(10), b(10), half(10);
  std::iota(a.begin(), a.end(), Vertex{0});
  std::iota(b.begin(), b.end(), Vertex{10});
  std::iota(half.begin(), half.end(), Vertex{5});
  std::reverse(half.begin(), half.end());
  EXPECT_EQ(precision_at(a, a, 10), 1.0);
  EXPECT_EQ(precision_at(a, b, 10), 0.0);
  EXPECT_EQ(precision_at(a, half, 10), 0.5);
}

TEST(Mae, Examples) {
  const std::vector<double> g = {0.1, 0.2, 0.7};
  EXPECT_EQ(mae(g, g), 0.0);
  const std::vector<double> shifted = {0.1 + 0.25, 0.2 + 0.25, 0.7 + 0.25};
  EXPECT_NEAR(mae(g, shifted), 0.25, 1e-15);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> a(1000), b(1000);
  double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = u(gen);
    b[i] = u(gen);
    total += std::fabs(a[i] - b[i]);
  }
  EXPECT_NEAR(mae(a, b), total / 1000.0, 1e-14);
}

TEST(Kendall, IdentityReversalOracle) {
  const std::vector<double> a = {0.9, 0.5, 0.3, 0.1, 0.05};
  const std::vector<double> rev = {0.05, 0.1, 0.3, 0.5, 0.9};
  EXPECT_EQ(kendall_tau(a, a), 1.0);
  EXPECT_EQ(kendall_tau(a, rev), -1.0);
  const std::vector<double> flat = {1, 1, 1, 1, 1};
  EXPECT_EQ(kendall_tau(a, flat), 0.0);

  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 40;
    const int levels = 1 + static_cast<int>(gen() % 12);  // small range forces ties
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(gen() % levels);
      y[i] = static_cast<double>(gen() % levels);
    }
    const double tau = kendall_tau(x, y);
    ASSERT_NEAR(tau, kendall_oracle(x, y), 1e-12);
    ASSERT_GE(tau, -1.0);
    ASSERT_LE(tau, 1.0);
  }
}

TEST(Evaluate, ReportFields) {
  RankingPair pair;
  pair.golden_scores = {0.4, 0.3, 0.2, 0.1};
  pair.candidate_scores = {0.3, 0.4, 0.2, 0.1};
  pair.golden_order = rank_scores(pair.golden_scores, 4);
  pair.candidate_order = rank_scores(pair.candidate_scores, 4);
  const std::vector<std::size_t> cutoffs = {2, 4};
  const auto report = evaluate(pair, cutoffs);
  ASSERT_EQ(report.at.size(), 2u);
  EXPECT_EQ(report.at[0].errors, 2u);
  EXPECT_EQ(report.at[0].precision, 1.0);
  EXPECT_EQ(report.at[1].errors, 2u);
  EXPECT_NEAR(report.mae, 0.05, 1e-15);
  EXPECT_NEAR(report.kendall_tau, 4.0 / 6.0, 1e-12);
  EXPECT_LT(report.ndcg_full, 1.0);
}

TEST(Convergence, CurvesAndTruncation) {
  ConvergenceTrace trace;
  trace.kappa = 2;
  trace.norms = {{1.0, 0.0}, {1e-3, 0.0}, {1e-8, 0.0}, {1e-9, 0.0}};
  const auto curves = convergence_norms(trace);
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[1], (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(truncate_below(curves[0], 1e-7), (std::vector<double>{1.0, 1e-3, 1e-8}));
  EXPECT_EQ(truncate_below(curves[1], 1e-7), (std::vector<double>{0.0}));
  EXPECT_EQ(iterations_to_reach(curves[0], 1e-2), 2u);
  EXPECT_FALSE(iterations_to_reach(curves[0], 1e-10).has_value());
}
