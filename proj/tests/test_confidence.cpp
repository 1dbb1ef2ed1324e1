#include "apex/confidence.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace apex;

namespace {

ConstraintSpec le(double bound, double p) {
  ConstraintSpec c;
  c.relation = Relation::less_equal;
  c.bound = bound;
  c.percentile = p;
  return c;
}

std::vector<double> sample(int n, int l) {
  // l values at or under the bound of 0, the rest above it.
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(i < l ? -1.0 : 1.0);
  return v;
}

}  // namespace

TEST(Beta, MatchesBruteForceEnumeration) {
  for (double p : {0.25, 0.5, 0.9}) {
    for (int n = 1; n <= 20; ++n) {
      auto table = test::binomial_brute_table(n, p);
      for (int l = 0; l <= n; ++l) {
        EXPECT_NEAR(binomial_lower_sum(n, l, p), test::binomial_brute(table, l), 1e-12)
            << "n=" << n << " l=" << l << " p=" << p;
        auto v = sample(n, l);
        EXPECT_NEAR(robustness_beta(v, le(0.0, p)), test::binomial_brute(table, l), 1e-12);
      }
    }
  }
}

TEST(Beta, SixOfSixAtMedian) {
  auto v = sample(6, 6);
  EXPECT_NEAR(robustness_beta(v, le(0.0, 0.5)), 63.0 / 64.0, 1e-15);
}

TEST(Beta, NoSatisfyingSampleIsZero) { EXPECT_EQ(robustness_beta(sample(5, 0), le(0.0, 0.5)), 0.0); }

TEST(Beta, SingleSatisfyingSample) { EXPECT_NEAR(robustness_beta(sample(1, 1), le(0.0, 0.5)), 0.5, 1e-15); }

TEST(Beta, NonDecreasingInSatisfyingCount) {
  for (int n = 1; n <= 15; ++n)
    for (int l = 1; l <= n; ++l) EXPECT_GE(binomial_lower_sum(n, l, 0.5), binomial_lower_sum(n, l - 1, 0.5));
}

TEST(Beta, HistoryTakesLowestAcrossConstraints) {
  auto space = test::crystal_space();
  Requirement r = test::crystal_requirement();
  ConstraintSpec delay;
  delay.metric = "delay";
  delay.relation = Relation::less_equal;
  delay.bound = 10.0;
  delay.percentile = 0.5;
  r.constraints.push_back(delay);
  auto c = canonicalize(r);
  test::HistoryBuilder hb(space.size());
  for (int i = 0; i < 4; ++i) hb.add(3, {{"energy", 1.0}, {"prr", 80.0}, {"delay", i < 2 ? 5.0 : 50.0}});
  const double prr_beta = binomial_lower_sum(4, 4, 0.5);
  const double delay_beta = binomial_lower_sum(4, 2, 0.5);
  EXPECT_NEAR(robustness_beta(hb.get(), 3, c), std::min(prr_beta, delay_beta), 1e-15);
}

TEST(Beta, NoConstraintsIsOne) {
  Requirement r;
  r.goal = {"energy", Direction::minimize, "J", 1.0};
  test::HistoryBuilder hb(4);
  hb.add(0, {{"energy", 1.0}});
  EXPECT_EQ(robustness_beta(hb.get(), 0, r), 1.0);
}

TEST(Kappa, MatchesFormulaOnGrid) {
  for (std::size_t d : {1u, 4u, 16u, 36u, 1000u})
    for (int n : {1, 2, 5, 10, 50, 200})
      for (double delta : {0.01, 0.1, 0.5, 0.9}) {
        const double want = test::kappa_oracle(static_cast<double>(d), n, delta);
        EXPECT_NEAR(kappa(n, d, delta), want, 1e-12 * std::max(1.0, want));
      }
}

TEST(Kappa, SpotValues) {
  EXPECT_NEAR(kappa(1, 16, 0.1), 3.3385, 5e-5);
  EXPECT_NEAR(kappa(10, 36, 0.1), 4.688, 5e-4);
}

TEST(Kappa, MonotoneInTrialsSpaceAndDelta) {
  for (int n = 1; n < 100; ++n) EXPECT_LT(kappa(n, 16, 0.1), kappa(n + 1, 16, 0.1));
  EXPECT_LT(kappa(5, 16, 0.1), kappa(5, 36, 0.1));
  EXPECT_GT(kappa(5, 16, 0.1), kappa(5, 16, 0.99));
}

TEST(Tau, DirectSubtraction) {
  EXPECT_EQ(instant_suboptimality(100.0, 90.0), 10.0);
  EXPECT_EQ(instant_suboptimality(5.0, 5.0), 0.0);
}

TEST(Trace, CumulativeSum) {
  SuboptimalityTrace t;
  t.push(1.0);
  t.push(2.5);
  t.push(0.0);
  EXPECT_EQ(t.cumulative(), (std::vector<double>{1.0, 3.5, 3.5}));
  EXPECT_THROW(t.push(NAN), std::invalid_argument);
}

TEST(Alpha, ConstantTauGivesLowConfidence) {
  SuboptimalityTrace t;
  for (int i = 0; i < 20; ++i) t.push(4.0);
  EXPECT_LE(optimality_alpha(t), 10.0);
  auto fit = fit_trend(t.cumulative());
  EXPECT_GE(fit.angle_deg, 43.0);
  EXPECT_LE(fit.angle_deg, 45.0 + 1e-9);
}

TEST(Alpha, SaturatedTraceGivesHighConfidence) {
  SuboptimalityTrace t;
  for (int i = 0; i < 25; ++i) t.push(i < 5 ? 10.0 : 0.0);
  EXPECT_GE(optimality_alpha(t), 90.0);
}

TEST(Alpha, EndSlopeAgreesWithFiniteDifference) {
  std::vector<double> cum;
  for (int i = 0; i < 30; ++i) cum.push_back(1.0 - std::exp(-0.2 * i));
  auto fit = fit_trend(cum);
  const double b = fit.rate;
  auto y = [b](double x) { return (1 - std::exp(-b * x)) / (1 - std::exp(-b)); };
  const double h = 1e-6;
  const double slope = (y(1.0) - y(1.0 - h)) / h;
  EXPECT_NEAR(fit.angle_deg, std::atan(slope) * 180.0 / 3.14159265358979323846, 1e-3);
}

TEST(Alpha, FewPointsAndFlatTrace) {
  EXPECT_EQ(optimality_alpha(std::vector<double>{}), 0.0);
  EXPECT_EQ(optimality_alpha(std::vector<double>{1.0, 2.0}), 0.0);
  EXPECT_EQ(optimality_alpha(std::vector<double>{0.0, 0.0, 0.0, 0.0}), 100.0);
}

TEST(Alpha, AlwaysWithinBounds) {
  Rng rng(77);
  for (int rep = 0; rep < 1000; ++rep) {
    SuboptimalityTrace t;
    const int n = 1 + static_cast<int>(uniform_index(rng, 60));
    for (int i = 0; i < n; ++i) t.push((uniform01(rng) - 0.3) * 20.0);
    const double a = optimality_alpha(t);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 100.0);
  }
}

TEST(AlphaB1, Cases) {
  EXPECT_EQ(alpha_b1(5.0, 5.0, 10.0), 100.0);
  EXPECT_EQ(alpha_b1(15.0, 5.0, 10.0), 0.0);
  EXPECT_NEAR(alpha_b1(7.5, 5.0, 10.0), 75.0, 1e-12);
  EXPECT_NEAR(alpha_b1(2.5, 5.0, 10.0), 75.0, 1e-12);
  EXPECT_EQ(alpha_b1(100.0, 5.0, 10.0), 0.0);
  EXPECT_EQ(alpha_b1(3.0, 5.0, 0.0), 100.0);
}

TEST(AlphaB2, Cases) {
  auto space = test::crystal_space();
  EXPECT_NEAR(alpha_b2(100.0, space, 6, 6, 0.5), 100.0, 1e-12);
  EXPECT_NEAR(alpha_b2(100.0, space, 0, 15, 0.5), 50.0, 1e-12);
  EXPECT_NEAR(alpha_b2(75.0, space, 0, 15, 1.0 - 1e-12), 75.0, 1e-6);
  EXPECT_THROW(alpha_b2(100.0, space, 0, 0, 1.0), std::invalid_argument);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double v = alpha_b2(uniform01(rng) * 100.0, space, uniform_index(rng, 16), uniform_index(rng, 16),
                              0.05 + 0.9 * uniform01(rng));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
  }
}
