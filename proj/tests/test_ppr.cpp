#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace qppr;

namespace {

PprConfig config(int iters) {
  PprConfig c;
  c.max_iter = iters;
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

}  // namespace

TEST(PprInit, OneHotColumns) {
  const auto g = normalize(EdgeList{4, {{0, 1}}}, Float64Arith{});
  PprEngine<Float64Arith> engine(g, config(1));
  const std::vector<Vertex> ids = {3};
  const auto p = engine.init(ids);
  EXPECT_EQ(p.column(0), (std::vector<double>{0, 0, 0, 1}));

  const std::vector<Vertex> two = {2, 0};
  const auto q = engine.init(two);
  EXPECT_EQ(q.column(0), (std::vector<double>{0, 0, 1, 0}));
  EXPECT_EQ(q.column(1), (std::vector<double>{1, 0, 0, 0}));

  const std::vector<Vertex> dup = {1, 1}, out_of_range = {4};
  EXPECT_EQ(code_of([&] { engine.init(dup); }), ErrorCode::kDuplicateVertex);
  EXPECT_EQ(code_of([&] { engine.init(out_of_range); }), ErrorCode::kVertexOutOfRange);
}

TEST(PprScaling, DanglingMass) {
  // Cycle: nobody dangles.
  const auto cycle = normalize(EdgeList{3, {{0, 1}, {1, 2}, {2, 0}}}, FixedArith(25));
  PprEngine<FixedArith> engine(cycle, config(1));
  const std::vector<Vertex> ids = {0, 1};
  for (auto s : engine.scaling(engine.init(ids))) EXPECT_EQ(s, 0u);

  const auto single = normalize(EdgeList{1, {}}, FixedArith(25));
  PprEngine<FixedArith> lone(single, config(1));
  const std::vector<Vertex> zero = {0};
  const auto s = lone.scaling(lone.init(zero));
  EXPECT_EQ(s[0], quantize(0.85, FxFormat(25)).raw());

  const auto fsingle = normalize(EdgeList{1, {}}, Float64Arith{});
  PprEngine<Float64Arith> flone(fsingle, config(1));
  EXPECT_EQ(flone.scaling(flone.init(zero))[0], 0.85);
}

TEST(PprScaling, FixedTracksFloat) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint32_t n = 5 + static_cast<std::uint32_t>(gen() % 100);
    const auto edges = test::random_edges(gen, n, 0.02);
    for (int f : {19, 25}) {
      const auto g = normalize(edges, FixedArith(f));
      PprEngine<FixedArith> engine(g, config(1));
      const auto p = test::random_batch(gen, g.arith(), n, 4);
      const auto s = engine.scaling(p);
      for (std::uint32_t k = 0; k < 4; ++k) {
        long double exact = 0.0L;
        for (Vertex v = 0; v < n; ++v) {
          if (g.is_dangling(v)) exact += g.arith().to_real(p.at(v, k));
        }
        exact *= 0.85L / n;
        const double bound = 4.0 * n * std::ldexp(1.0, -f);
        ASSERT_NEAR(g.arith().to_real(s[k]), static_cast<double>(exact), bound);
      }
    }
  }
}

TEST(PprStep, SingleVertexKeepsUnitMass) {
  const auto g = normalize(EdgeList{1, {}}, Float64Arith{});
  PprEngine<Float64Arith> engine(g, config(25));
  const std::vector<Vertex> ids = {0};
  const auto result = engine.run(ids);
  for (const auto& mass : result.trace.mass) EXPECT_EQ(mass[0], 1.0);
  EXPECT_EQ(result.ranks.at(0, 0), 1.0);
  for (const auto& norm : result.trace.norms) EXPECT_EQ(norm[0], 0.0);
}

TEST(PprRun, TwoCycleClosedForm) {
  const auto g = normalize(EdgeList{2, {{0, 1}, {1, 0}}}, Float64Arith{});
  PprConfig c = config(100);
  c.kernel = SpmvKernel::kReference;
  const std::vector<Vertex> ids = {0};
  const auto result = run_ppr(g, c, ids);
  // p0 = 0.15 + 0.85 p1, p1 = 0.85 p0.
  const double p0 = 0.15 / (1.0 - 0.85 * 0.85);
  // The error contracts by alpha per step.
  const double bound = std::pow(0.85, 100);
  EXPECT_NEAR(result.ranks.at(0, 0), p0, bound);
  EXPECT_NEAR(result.ranks.at(1, 0), 0.85 * p0, bound);
  EXPECT_NEAR(p0, 0.540541, 1e-6);

  // Successive step norms shrink by alpha per step, alpha^2 per two.
  const auto curve = metrics::convergence_norms(result.trace)[0];
  for (std::size_t t = 0; t + 2 < 30; ++t) {
    EXPECT_NEAR(curve[t + 2] / curve[t], 0.85 * 0.85, 1e-9);
  }
}

TEST(PprRun, ZeroIterationsReturnsInit) {
  const auto g = normalize(EdgeList{3, {{0, 1}, {1, 2}}}, FixedArith(19));
  const std::vector<Vertex> ids = {1};
  const auto result = run_ppr(g, config(0), ids);
  EXPECT_EQ(result.iterations, 0);
  EXPECT_EQ(result.ranks.at(1, 0), g.arith().one());
  EXPECT_EQ(result.ranks.at(0, 0), 0u);
  EXPECT_TRUE(result.trace.norms.empty());
}

TEST(PprRun, FloatMassIsConserved) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 25; ++trial) {
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(gen() % 300);
    const auto edges = test::random_edges(gen, n, 0.01 + 0.05 * (trial % 3));
    const auto g = normalize(edges, Float64Arith{});
    Rng rng(trial);
    const auto ids = sample_distinct(n, std::min<std::uint32_t>(n, 8), rng);
    const auto result = run_ppr(g, config(15), ids);
    for (const auto& row : result.trace.mass) {
      for (double m : row) ASSERT_NEAR(m, 1.0, 1e-12);
    }
  }
}

TEST(PprRun, FixedMassStaysWithinTruncationBound) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(gen() % 300);
    const auto edges = test::random_edges(gen, n, 0.03);
    for (int f : {19, 21, 23, 25}) {
      const auto g = normalize(edges, FixedArith(f));
      Rng rng(trial);
      const auto ids = sample_distinct(n, std::min<std::uint32_t>(n, 8), rng);
      const auto result = run_ppr(g, config(10), ids);
      ASSERT_EQ(result.saturations, 0u);
      for (std::size_t t = 0; t < result.trace.mass.size(); ++t) {
        const double lower = 1.0 - 4.0 * static_cast<double>(t + 1) * n * std::ldexp(1.0, -f);
        for (double m : result.trace.mass[t]) {
          ASSERT_GE(m, lower);
          ASSERT_LE(m, 1.0 + std::ldexp(1.0, -f));
        }
      }
    }
  }
}

TEST(PprRun, StreamAndReferenceKernelsAgree) {
  std::mt19937_64 gen(21);
  const auto edges = test::random_edges(gen, 180, 0.03, true);
  const auto g = normalize(edges, FixedArith(21));
  const std::vector<Vertex> ids = {0, 5, 17, 100};
  PprConfig a = config(12), b = config(12);
  b.kernel = SpmvKernel::kReference;
  EXPECT_EQ(run_ppr(g, a, ids).ranks.values, run_ppr(g, b, ids).ranks.values);
}

TEST(PprRun, DeterministicAcrossRuns) {
  std::mt19937_64 gen(2);
  const auto edges = test::random_edges(gen, 150, 0.05);
  const auto g = normalize(edges, FixedArith(19));
  const std::vector<Vertex> ids = {3, 9};
  EXPECT_EQ(run_ppr(g, config(10), ids).ranks.values, run_ppr(g, config(10), ids).ranks.values);
}

TEST(PprRun, FixedIteratesReachAQuantizedFixedPoint) {
  std::mt19937_64 gen(6);
  const auto edges = test::random_edges(gen, 40, 0.1);
  const auto g = normalize(edges, FixedArith(19));
  const std::vector<Vertex> ids = {0};
  const auto result = run_ppr(g, config(300), ids);
  const auto curve = metrics::convergence_norms(result.trace)[0];
  EXPECT_EQ(curve.back(), 0.0);
}

TEST(PprRun, EarlyStop) {
  const auto g = normalize(EdgeList{2, {{0, 1}, {1, 0}}}, Float64Arith{});
  PprConfig c = config(1000);
  c.early_stop = true;
  c.convergence_eps = 1e-6;
  const std::vector<Vertex> ids = {0};
  const auto result = run_ppr(g, c, ids);
  EXPECT_LT(result.iterations, 1000);
  EXPECT_LT(result.trace.max_norm(result.trace.iterations() - 1), 1e-6);
  EXPECT_GE(result.trace.max_norm(result.trace.iterations() - 2), 1e-6);
}

TEST(PprRun, CapacityAndConfigChecks) {
  const auto g = normalize(EdgeList{10, {{0, 1}}}, Float64Arith{});
  PprConfig small = config(1);
  small.vertex_capacity = 5;
  EXPECT_EQ(code_of([&] { PprEngine<Float64Arith> e(g, small); }), ErrorCode::kCapacityExceeded);
  PprConfig bad = config(1);
  bad.alpha = 1.0;
  EXPECT_EQ(code_of([&] { PprEngine<Float64Arith> e(g, bad); }), ErrorCode::kInvalidArgument);
}

TEST(PprStep, SaturationIsSurfaced) {
  // Two near-maximal sources feeding one destination overflow Q1.f.
  const auto g = normalize(EdgeList{3, {{0, 2}, {1, 2}}}, FixedArith(8));
  PprEngine<FixedArith> engine(g, config(1));
  RankBatch<FixedArith> p(g.arith(), 3, 1);
  p.personalization = {0};
  p.at(0, 0) = g.arith().format().max_raw();
  p.at(1, 0) = g.arith().format().max_raw();
  EXPECT_EQ(code_of([&] { engine.step(p); }), ErrorCode::kSaturationDetected);
  EXPECT_GT(engine.saturations(), 0u);
}

TEST(Rank, OrderAndTies) {
  RankBatch<Float64Arith> p(Float64Arith{}, 3, 1);
  p.values = {0.1, 0.5, 0.4};
  EXPECT_EQ(rank(p, 0, 3), (std::vector<Vertex>{1, 2, 0}));
  EXPECT_EQ(rank(p, 0, 1), (std::vector<Vertex>{1}));
  RankBatch<Float64Arith> tie(Float64Arith{}, 2, 1);
  tie.values = {0.5, 0.5};
  EXPECT_EQ(rank(tie, 0, 2), (std::vector<Vertex>{0, 1}));
  EXPECT_EQ(code_of([&] { rank(p, 0, 4); }), ErrorCode::kCutoffTooLarge);
}

TEST(Rank, MatchesStableSortOracle) {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(gen() % 500);
    RankBatch<FixedArith> p(FixedArith(8), n, 2);
    for (auto& v : p.values) v = gen() % 64;  // plenty of ties
    for (std::uint32_t k = 0; k < 2; ++k) {
      std::vector<Vertex> oracle(n);
      std::iota(oracle.begin(), oracle.end(), Vertex{0});
      std::stable_sort(oracle.begin(), oracle.end(),
                       [&](Vertex a, Vertex b) { return p.at(a, k) > p.at(b, k); });
      const std::size_t cut = gen() % (n + 1);
      oracle.resize(cut);
      ASSERT_EQ(rank(p, k, cut), oracle);
      const auto col = p.column(k);
      ASSERT_EQ(rank_scores(col, cut), oracle);
    }
  }
}
