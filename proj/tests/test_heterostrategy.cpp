#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "fnaware/heterostrategy.hpp"
#include "oracles.hpp"

using namespace fnaware;

namespace {

std::vector<CacheProfile> three_cache_instance() {
  return {{0, 1.0, 0.1}, {1, 2.0, 0.2}, {2, 3.0, 0.3}};
}

struct RandomInstance {
  std::vector<std::uint8_t> indications;
  std::vector<ExclusionEstimate> estimates;
  std::vector<double> costs;
  std::vector<oracle::MixedCache> mixed;
  double p;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomInstance r;
  const std::size_t n = 1 + rng() % 10;
  r.p = 1.0 + u(rng) * 999.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double h = 0.01 + 0.98 * u(rng);
    IndicatorAccuracy acc{u(rng) * 0.5, u(rng) * 0.5};
    const auto mr = exclusion_probs(h, acc);
    ExclusionEstimate e;
    e.h = h;
    e.q = positive_prob(h, acc);
    e.mr_pos = mr.mr_pos;
    e.mr_neg = mr.mr_neg;
    const bool pos = rng() & 1;
    const double c = 1.0 + u(rng) * 20.0;
    r.indications.push_back(pos ? 1 : 0);
    r.estimates.push_back(e);
    r.costs.push_back(c);
    r.mixed.push_back({c, e.mr_pos, e.mr_neg, pos});
  }
  return r;
}

}  // namespace

TEST(ServiceCost, Substitutions) {
  const auto prof = three_cache_instance();
  EXPECT_DOUBLE_EQ(service_cost(std::vector<std::size_t>{}, prof, 100.0), 100.0);
  const std::vector<CacheProfile> one{{0, 1.0, 0.1}};
  EXPECT_NEAR(service_cost(std::vector<std::size_t>{0}, one, 100.0), 11.0, 1e-12);
  EXPECT_NEAR(service_cost(std::vector<std::size_t>{0, 1}, prof, 100.0), 5.0, 1e-12);
  EXPECT_THROW(service_cost(std::vector<std::size_t>{7}, prof, 100.0), InvalidArgument);
}

TEST(Exhaustive, Examples) {
  const auto empty = solve_fno_exhaustive({}, 100.0);
  EXPECT_TRUE(empty.selected.empty());
  EXPECT_DOUBLE_EQ(empty.predicted_cost, 100.0);
  const auto d = solve_fno_exhaustive(three_cache_instance(), 100.0);
  EXPECT_EQ(d.selected, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(d.predicted_cost, 5.0, 1e-12);
}

TEST(Exhaustive, SizeLimit) {
  std::vector<CacheProfile> many;
  for (std::size_t j = 0; j <= kExhaustiveLimit; ++j) many.push_back({j, 1.0, 0.5});
  EXPECT_THROW(solve_fno_exhaustive(many, 100.0), SizeLimitError);
  EXPECT_NO_THROW(AutoSolver{}(many, 100.0));
}

TEST(Exhaustive, TieBreaksByAccessCostThenIds) {
  // {0} and {1} both cost 2 + 3 = 5 (the pair costs 5.5): the smaller id set.
  const std::vector<CacheProfile> twins{{0, 2.0, 0.5}, {1, 2.0, 0.5}};
  const auto d = solve_fno_exhaustive(twins, 6.0);
  EXPECT_EQ(d.selected, (std::vector<std::size_t>{0}));
  // Same total 7: {1} = 2 + 5, {0} = 4.5 + 2.5. The smaller access cost wins.
  const std::vector<CacheProfile> mix{{1, 2.0, 0.5}, {0, 4.5, 0.25}};
  EXPECT_EQ(solve_fno_exhaustive(mix, 10.0).selected, (std::vector<std::size_t>{1}));
}

TEST(Exhaustive, NeverWorseThanSingletonsOrEmpty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10'000; ++t) {
    const std::size_t n = 1 + rng() % 10;
    const double p = 1.0 + 999.0 * u(rng);
    std::vector<CacheProfile> prof;
    for (std::size_t j = 0; j < n; ++j) prof.push_back({j, 1.0 + 10 * u(rng), clamp_prob(u(rng))});
    const auto d = solve_fno_exhaustive(prof, p);
    ASSERT_DOUBLE_EQ(d.predicted_cost, service_cost(d.selected, prof, p));
    ASSERT_LE(d.predicted_cost, p);
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_LE(d.predicted_cost, prof[j].access_cost + p * prof[j].exclusion + 1e-12);
    }
  }
}

TEST(Greedy, Examples) {
  const std::vector<CacheProfile> hopeless{{0, 1.0, 1.0 - kEpsilon}, {1, 1.0, 1.0 - kEpsilon}};
  EXPECT_TRUE(solve_fno_greedy(hopeless, 5.0).selected.empty());
  const auto d = solve_fno_greedy(three_cache_instance(), 100.0);
  EXPECT_EQ(d.selected, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(d.predicted_cost, 5.0, 1e-12);
}

// Empirical bound: over these draws the worst ratio measured 2.098 (one
// instance; see GreedyCounterexample) and >= 90% of instances are within
// 5% of optimal. The ceiling is pinned just above the measurement.
TEST(Greedy, ApproximationAgainstExhaustive) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 1.0;
  int within = 0;
  const int trials = 10'000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng() % 10;
    const double p = 1.0 + 999.0 * u(rng);
    std::vector<CacheProfile> prof;
    for (std::size_t j = 0; j < n; ++j) prof.push_back({j, 1.0 + 10 * u(rng), clamp_prob(u(rng))});
    const double g = solve_fno_greedy(prof, p).predicted_cost;
    const double e = solve_fno_exhaustive(prof, p).predicted_cost;
    ASSERT_GE(g, e - 1e-9);
    worst = std::max(worst, g / e);
    within += g / e <= 1.05;
  }
  RecordProperty("worst_ratio", std::to_string(worst));
  EXPECT_LE(worst, 2.1);
  EXPECT_GE(within, trials * 9 / 10);
}

// Greedy grabs the cheap near-certain hit (c 8.466, rho 0.014) first; the
// optimum pairs two cheaper caches, so greedy pays about twice the optimum.
TEST(Greedy, Counterexample) {
  const std::vector<CacheProfile> prof{
      {0, 1.214, 0.291}, {1, 1.960, 0.902}, {2, 4.545, 0.617}, {3, 1.009, 0.541},
      {4, 8.466, 0.014}, {5, 2.013, 0.083}, {6, 2.071, 0.677}, {7, 5.934, 0.946},
      {8, 9.148, 0.156}, {9, 1.732, 0.062}};
  const double p = 234.582;
  const auto g = solve_fno_greedy(prof, p);
  const auto e = solve_fno_exhaustive(prof, p);
  EXPECT_EQ(g.selected, (std::vector<std::size_t>{4, 9}));
  EXPECT_EQ(e.selected, (std::vector<std::size_t>{5, 9}));
  EXPECT_GT(g.predicted_cost / e.predicted_cost, 2.0);
}

TEST(Reduction, AllPositiveIsIdentity) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 500; ++t) {
    auto inst = random_instance(rng);
    std::fill(inst.indications.begin(), inst.indications.end(), 1);
    std::vector<CacheProfile> direct;
    for (std::size_t j = 0; j < inst.costs.size(); ++j) {
      direct.push_back({j, inst.costs[j], inst.estimates[j].mr_pos});
    }
    const auto a = reduce_and_solve(inst.indications, inst.estimates, inst.costs, inst.p,
                                    ExhaustiveSolver{});
    const auto b = solve_fno_exhaustive(direct, inst.p);
    ASSERT_EQ(a.selected, b.selected);
    ASSERT_EQ(a.predicted_cost, b.predicted_cost);
  }
}

TEST(Reduction, ZeroFnrNeverPicksNegatives) {
  // mr_neg = 1 - eps; with p * eps < 1 no negative cache can pay off.
  std::vector<std::uint8_t> ind{0, 1, 0, 1};
  std::vector<ExclusionEstimate> est(4);
  for (auto& e : est) {
    e.mr_pos = 0.2;
    e.mr_neg = 1.0 - kEpsilon;
  }
  std::vector<double> costs{1, 1, 1, 1};
  const auto d = reduce_and_solve(ind, est, costs, 1000.0, ExhaustiveSolver{});
  for (auto id : d.selected) EXPECT_EQ(ind[id], 1);
}

TEST(Reduction, MatchesDirectMixedOptimum) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10'000; ++t) {
    const auto inst = random_instance(rng);
    const auto d = reduce_and_solve(inst.indications, inst.estimates, inst.costs, inst.p,
                                    ExhaustiveSolver{});
    const double ref = oracle::mixed_optimum(inst.mixed, inst.p);
    ASSERT_LE(std::abs(d.predicted_cost - ref), 1e-9 * ref);
  }
}

TEST(Reduction, LengthMismatchRejected) {
  std::vector<std::uint8_t> ind{1};
  std::vector<ExclusionEstimate> est(2);
  std::vector<double> costs{1, 1};
  EXPECT_THROW(reduce_and_solve(ind, est, costs, 10.0, ExhaustiveSolver{}), InvalidArgument);
}

TEST(Properties, MonotonePenaltyResponse) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<CacheProfile> prof;
    for (std::size_t j = 0; j < n; ++j) prof.push_back({j, 1.0 + 5 * u(rng), clamp_prob(u(rng))});
    const double p1 = 1.0 + 500 * u(rng);
    const double p2 = p1 + 500 * u(rng);
    const auto a = solve_fno_exhaustive(prof, p1);
    const auto b = solve_fno_exhaustive(prof, p2);
    ASSERT_LE(a.predicted_cost, b.predicted_cost + 1e-12);
    // A larger penalty never buys less access: sum c over the p2 decision
    // lies between the p1 decision's access cost and the p2 optimum.
    auto access = [&](const AccessDecision& d) {
      double s = 0.0;
      for (auto id : d.selected) s += prof[id].access_cost;
      return s;
    };
    ASSERT_GE(access(b), access(a) - 1e-9);
    ASSERT_LE(access(b), b.predicted_cost + 1e-12);
  }
}

TEST(Properties, ObliviousDominanceAtZeroFnr) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<std::uint8_t> ind(n);
    std::vector<IndicatorAccuracy> acc(n);
    std::vector<double> q(n), costs(n);
    for (std::size_t j = 0; j < n; ++j) {
      ind[j] = rng() & 1;
      acc[j] = {u(rng) * 0.2, 0.0};
      q[j] = acc[j].fpr + u(rng) * (1 - acc[j].fpr);
      costs[j] = 1.0 + 5 * u(rng);
    }
    const double p = 1.0 + 999 * u(rng);
    const RequestContext ctx{ind, acc, q, costs, p};
    const auto fna = pgm_fna_decide(ctx, ExhaustiveSolver{});
    const auto fno = pgm_fno_decide(ctx, ExhaustiveSolver{});
    ASSERT_NEAR(fna.decision.predicted_cost, fno.decision.predicted_cost, kEpsilon * p * n + 1e-9);
  }
}

TEST(PgmFna, FreshIndicatorsPickCheapestPositive) {
  // fnr = 0 and a single positive on the cheapest cache: probing it alone
  // is optimal.
  std::vector<std::uint8_t> ind{1, 0, 0};
  std::vector<IndicatorAccuracy> acc(3, {0.001, 0.0});
  std::vector<double> q{0.3, 0.3, 0.3}, costs{1, 2, 3};
  const RequestContext ctx{ind, acc, q, costs, 100.0};
  const auto out = pgm_fna_decide(ctx, ExhaustiveSolver{});
  EXPECT_EQ(out.decision.selected, (std::vector<std::size_t>{0}));
  EXPECT_EQ(out.insufficiently_accurate, 0u);
  std::vector<oracle::MixedCache> mixed;
  std::size_t dummy = 0;
  const auto est = estimate_exclusions(ctx, dummy);
  for (std::size_t j = 0; j < 3; ++j) mixed.push_back({costs[j], est[j].mr_pos, est[j].mr_neg, ind[j] != 0});
  EXPECT_NEAR(out.decision.predicted_cost, oracle::mixed_optimum(mixed, 100.0), 1e-12);
}

TEST(PgmFna, NoPositivesAndZeroFnrAccessesNothing) {
  std::vector<std::uint8_t> ind{0, 0, 0};
  std::vector<IndicatorAccuracy> acc(3, {0.01, 0.0});
  std::vector<double> q{0.2, 0.4, 0.1}, costs{1, 2, 3};
  const RequestContext ctx{ind, acc, q, costs, 100.0};
  EXPECT_TRUE(pgm_fna_decide(ctx, ExhaustiveSolver{}).decision.selected.empty());
}

// Costs (10, 20, 1), p = 100, indications (0, 1, 0), where the positive of
// the second cache is most likely false. The third cache is worth a probe
// despite its negative indication once its miss probability drops below 0.99.
TEST(PgmFna, CheapNegativeCacheWorthProbing) {
  std::vector<std::uint8_t> ind{0, 1, 0};
  std::vector<double> costs{10, 20, 1};
  std::vector<ExclusionEstimate> est(3);
  est[0].mr_neg = 0.95;
  est[1].mr_pos = 0.9;
  est[2].mr_neg = 0.98;
  const auto d = reduce_and_solve(ind, est, costs, 100.0, ExhaustiveSolver{});
  EXPECT_TRUE(std::count(d.selected.begin(), d.selected.end(), 2u));
  est[2].mr_neg = 0.995;
  const auto d2 = reduce_and_solve(ind, est, costs, 100.0, ExhaustiveSolver{});
  EXPECT_FALSE(std::count(d2.selected.begin(), d2.selected.end(), 2u));

  // The same through the full client policy, from reported accuracy.
  std::vector<IndicatorAccuracy> acc(3, {0.01, 0.05});
  // A positive ratio barely above fpr makes the second cache's positive
  // nearly worthless (mr_pos ~ 0.91).
  std::vector<double> q{0.3, 0.011, 0.3};
  const RequestContext ctx{ind, acc, q, costs, 100.0};
  std::size_t insufficient = 0;
  const auto beliefs = estimate_exclusions(ctx, insufficient);
  ASSERT_LT(beliefs[2].mr_neg, 0.99);
  const auto out = pgm_fna_decide(ctx, ExhaustiveSolver{});
  EXPECT_TRUE(std::count(out.decision.selected.begin(), out.decision.selected.end(), 2u));
}

TEST(PgmFna, InsufficientAccuracyIsCounted) {
  std::vector<std::uint8_t> ind{1, 0};
  std::vector<IndicatorAccuracy> acc{{0.6, 0.5}, {0.01, 0.01}};
  std::vector<double> q{0.5, 0.2}, costs{1, 1};
  const RequestContext ctx{ind, acc, q, costs, 50.0};
  const auto out = pgm_fna_decide(ctx, GreedySolver{});
  EXPECT_EQ(out.insufficiently_accurate, 1u);
}
