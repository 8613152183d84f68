#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "fnaware/beliefs.hpp"
#include "oracles.hpp"

using namespace fnaware;

TEST(PositiveProb, Substitutions) {
  EXPECT_DOUBLE_EQ(positive_prob(1.0, {0.3, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(positive_prob(0.0, {0.0, 0.4}), 0.0);
  EXPECT_NEAR(positive_prob(0.5, {0.01, 0.05}), 0.480, 1e-12);
}

TEST(ExclusionProbs, WorkedExample) {
  const auto mr = exclusion_probs(0.5, {0.01, 0.05});
  EXPECT_NEAR(mr.mr_pos, 0.005 / 0.480, 1e-12);
  EXPECT_NEAR(mr.mr_neg, 0.495 / 0.520, 1e-12);
  EXPECT_NEAR(mr.mr_pos, 0.01042, 5e-6);
  EXPECT_NEAR(mr.mr_neg, 0.95192, 5e-6);
}

TEST(ExclusionProbs, ClampedLimits) {
  EXPECT_DOUBLE_EQ(exclusion_probs(0.4, {0.0, 0.1}).mr_pos, kEpsilon);
  EXPECT_DOUBLE_EQ(exclusion_probs(0.4, {0.1, 0.0}).mr_neg, 1.0 - kEpsilon);
  for (double h : {0.0, 1.0}) {
    const auto mr = exclusion_probs(h, {0.0, 0.0});
    EXPECT_GE(mr.mr_pos, kEpsilon);
    EXPECT_LE(mr.mr_neg, 1.0 - kEpsilon);
  }
}

TEST(SufficientAccuracy, Examples) {
  EXPECT_TRUE(is_sufficiently_accurate({0.01, 0.05}));
  EXPECT_FALSE(is_sufficiently_accurate({0.6, 0.5}));
  EXPECT_FALSE(is_sufficiently_accurate({0.5, 0.5}));
}

TEST(SufficientAccuracy, EquivalentToOrderedExclusions) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> hd(0.01, 0.99), u(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 10'000; ++i) {
    const double h = hd(rng);
    const IndicatorAccuracy acc{u(rng), u(rng)};
    if (std::abs(acc.fpr + acc.fnr - 1.0) < 1e-9) continue;
    const auto mr = exclusion_probs(h, acc);
    violations += is_sufficiently_accurate(acc) != (mr.mr_neg > mr.mr_pos);
  }
  EXPECT_EQ(violations, 0);
}

TEST(BayesConsistency, MonteCarloMatchesPosteriors) {
  const struct { double h, fpr, fnr; } cases[] = {
      {0.5, 0.01, 0.05}, {0.2, 0.1, 0.3}, {0.8, 0.3, 0.02}};
  std::uint64_t seed = 10;
  for (const auto& c : cases) {
    const auto mr = exclusion_probs(c.h, {c.fpr, c.fnr});
    const auto f = oracle::bayes_monte_carlo(c.h, c.fpr, c.fnr, 1'000'000, seed++);
    EXPECT_NEAR(f.absent_given_pos, mr.mr_pos, 3 * f.se_pos + 1e-12);
    EXPECT_NEAR(f.absent_given_neg, mr.mr_neg, 3 * f.se_neg + 1e-12);
  }
}

TEST(EstimateHitRatio, EndpointsAndClamping) {
  const IndicatorAccuracy acc{0.02, 0.08};
  // q = fpr: every positive is false; q = 1 - fnr: every item is cached.
  EXPECT_DOUBLE_EQ(estimate_hit_ratio(0.02, acc), 0.0);
  EXPECT_NEAR(estimate_hit_ratio(0.92, acc), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(estimate_hit_ratio(0.0, acc), 0.0);
  EXPECT_DOUBLE_EQ(estimate_hit_ratio(1.0, acc), 1.0);
  EXPECT_THROW(estimate_hit_ratio(0.5, {0.6, 0.4}), ContractViolation);
}

TEST(EstimateHitRatio, InvertsPositiveProb) {
  EXPECT_NEAR(estimate_hit_ratio(positive_prob(0.37, {0.02, 0.08}), {0.02, 0.08}), 0.37, 1e-12);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10'000; ++i) {
    const double h = u(rng);
    IndicatorAccuracy acc{u(rng) * 0.5, u(rng) * 0.5};
    if (!is_sufficiently_accurate(acc)) continue;
    ASSERT_NEAR(estimate_hit_ratio(positive_prob(h, acc), acc), h, 1e-12);
  }
}

TEST(PositiveRateEstimator, AllPositiveFixpoint) {
  PositiveRateEstimator est(10, 0.25, 0.0);
  for (int t = 1; t <= 200; ++t) {
    ewma_observe(est, true);
    if (t % 10 == 0) EXPECT_DOUBLE_EQ(est.q(), 1.0);
  }
}

TEST(PositiveRateEstimator, EpochBlendSubstitution) {
  // Bootstrap to q = 0.5, then one epoch with ratio 0.9: 0.25*0.9 + 0.75*0.5.
  PositiveRateEstimator est(10, 0.25, 0.0);
  for (int i = 0; i < 10; ++i) est.observe(i % 2 == 0);
  EXPECT_DOUBLE_EQ(est.q(), 0.5);
  EXPECT_FALSE(est.bootstrapping());
  for (int i = 0; i < 9; ++i) {
    est.observe(true);
    EXPECT_DOUBLE_EQ(est.q(), 0.5);  // frozen inside the epoch
  }
  est.observe(false);
  EXPECT_DOUBLE_EQ(est.q(), 0.6);
  EXPECT_EQ(est.window_total(), 0u);
}

TEST(PositiveRateEstimator, PriorBeforeFirstRequest) {
  PositiveRateEstimator est(100, 0.25, 0.0012);
  EXPECT_DOUBLE_EQ(est.q(), 0.0012);
  est.observe(true);
  EXPECT_DOUBLE_EQ(est.q(), 1.0);
}

TEST(PositiveRateEstimator, MatchesScalarRecurrence) {
  std::mt19937_64 rng(12);
  for (double p : {0.1, 0.5, 0.93}) {
    std::bernoulli_distribution b(p);
    std::vector<int> stream(10 * 50 + 17);
    for (auto& x : stream) x = b(rng);
    const auto expect = oracle::ewma_trace(stream, 50, 0.25, 0.3);
    PositiveRateEstimator est(50, 0.25, 0.3);
    for (std::size_t t = 0; t < stream.size(); ++t) {
      est.observe(stream[t] != 0);
      ASSERT_NEAR(est.q(), expect[t], 1e-15) << "t=" << t;
      ASSERT_LE(est.window_total(), est.horizon());
      ASSERT_GE(est.q(), 0.0);
      ASSERT_LE(est.q(), 1.0);
    }
  }
}

TEST(PositiveRateEstimator, RejectsBadParameters) {
  EXPECT_THROW(PositiveRateEstimator(0, 0.25, 0.0), InvalidArgument);
  EXPECT_THROW(PositiveRateEstimator(10, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(PositiveRateEstimator(10, 1.0, 0.0), InvalidArgument);
}

TEST(ExclusionEstimate, IndicationSelectsPosterior) {
  const auto est = make_exclusion_estimate(0.48, {0.01, 0.05});
  EXPECT_NEAR(est.h, 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(exclusion_for_indication(est, true), est.mr_pos);
  EXPECT_DOUBLE_EQ(exclusion_for_indication(est, false), est.mr_neg);
  // Unclamped h: observed and model denominators agree.
  const auto model = exclusion_probs(0.5, {0.01, 0.05});
  EXPECT_NEAR(est.mr_pos, model.mr_pos, 1e-12);
  EXPECT_NEAR(est.mr_neg, model.mr_neg, 1e-12);
  EXPECT_GT(est.mr_neg, est.mr_pos);
}

TEST(ExclusionEstimate, ZeroFnrRecoversObliviousNegatives) {
  const auto est = make_exclusion_estimate(0.3, {0.01, 0.0});
  EXPECT_DOUBLE_EQ(exclusion_for_indication(est, false), 1.0 - kEpsilon);
}

// When the observed q is below the reported fpr, h clamps to 0; the
// posteriors then divide by the observed q, not by the model value.
TEST(ExclusionEstimate, ClampedHitRatioUsesObservedRatio) {
  const IndicatorAccuracy acc{0.05, 0.3};
  const auto est = make_exclusion_estimate(0.02, acc);
  EXPECT_DOUBLE_EQ(est.h, 0.0);
  EXPECT_DOUBLE_EQ(est.mr_pos, 1.0 - kEpsilon);
  EXPECT_NEAR(est.mr_neg, 0.95 * (1 - kEpsilon) / 0.98, 1e-15);
  EXPECT_NEAR(exclusion_probs(0.0, acc).mr_neg, 1.0 - kEpsilon, 1e-9);
  for (double v : {est.h, est.q, est.mr_pos, est.mr_neg}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
