#include "apex/acquisition.hpp"
#include "apex/confidence.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace apex;

namespace {

Posterior make_posterior(std::vector<double> mean, std::vector<double> sd) {
  Posterior p;
  p.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  p.stddev = Eigen::Map<Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return p;
}

std::vector<SetIndex> all(std::size_t n) {
  std::vector<SetIndex> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(Lcb, Arithmetic) {
  EXPECT_EQ(lcb(10.0, 2.0, 3.0), 4.0);
  EXPECT_NEAR(lcb(0.0, 1.0, kappa(1, 16, 0.1)), -3.3385, 5e-5);
}

TEST(Ei, ClosedFormSpots) {
  EXPECT_NEAR(expected_improvement(5.0, 2.0, 5.0), 0.79788, 1e-5);
  EXPECT_NEAR(expected_improvement(5.0, 1.0, 5.0), 0.39894, 1e-5);
  EXPECT_NEAR(expected_improvement(8.0, 1.0, 10.0), 2.00849, 1e-5);
}

TEST(Ei, MatchesErfcOracle) {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const double mu = standard_normal(rng) * 10;
    const double sd = uniform01(rng) * 5;
    const double fb = standard_normal(rng) * 10;
    EXPECT_NEAR(expected_improvement(mu, sd, fb), test::ei_oracle(mu, sd, fb), 1e-10);
  }
}

TEST(Ei, NonNegativeAndVanishingWithSigma) {
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const double mu = standard_normal(rng) * 100;
    const double sd = std::pow(10.0, -12.0 + 14.0 * uniform01(rng));
    EXPECT_GE(expected_improvement(mu, sd, standard_normal(rng) * 100), 0.0);
  }
  EXPECT_LT(std::abs(expected_improvement(11.0, 1e-12, 10.0)), 1e-9);
  EXPECT_EQ(expected_improvement(11.0, 0.0, 10.0), 0.0);
  EXPECT_EQ(expected_improvement(9.0, 0.0, 10.0), 0.0);
}

TEST(Cv, GuardsSmallMean) {
  EXPECT_NEAR(coefficient_of_variation(-4.0, 2.0), 0.5, 1e-15);
  EXPECT_NEAR(coefficient_of_variation(0.0, 1e-9), 1.0, 1e-12);
}

TEST(Select, LcbMatchesExhaustiveScan) {
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> m(16), s(16);
    for (int i = 0; i < 16; ++i) {
      m[i] = standard_normal(rng);
      s[i] = uniform01(rng);
    }
    auto post = make_posterior(m, s);
    std::vector<SetIndex> cand;
    for (SetIndex i = 0; i < 16; ++i)
      if (uniform01(rng) < 0.6) cand.push_back(i);
    if (cand.empty()) continue;
    const double k = 1.0 + uniform01(rng) * 3;
    SetIndex want = cand[0];
    for (SetIndex c : cand)
      if (m[c] - k * s[c] < m[want] - k * s[want]) want = c;
    EXPECT_EQ(select_gp_lcb(post, cand, k), want);
    const double fb = standard_normal(rng);
    SetIndex ei_want = cand[0];
    for (SetIndex c : cand)
      if (test::ei_oracle(m[c], s[c], fb) > test::ei_oracle(m[ei_want], s[ei_want], fb)) ei_want = c;
    EXPECT_EQ(select_ei(post, cand, fb), ei_want);
  }
}

TEST(Select, EmptyAndSingleton) {
  auto post = make_posterior({1.0, 2.0}, {0.5, 0.5});
  EXPECT_FALSE(select_gp_lcb(post, {}, 2.0).has_value());
  std::vector<SetIndex> one{1};
  EXPECT_EQ(select_gp_lcb(post, one, 2.0), 1u);
  EXPECT_EQ(select_ei(post, one, 0.0), 1u);
}

TEST(Select, CertainModelPicksLowestIndexAndTraps) {
  auto post = make_posterior({3.0, 1.0, 2.0}, {0.0, 0.0, 0.0});
  std::vector<SetIndex> cand{2, 0, 1};
  EXPECT_EQ(select_ei(post, cand, 0.5), 0u);
  NtsState st;
  st.update(AcquisitionKind::ei, 0.0);
  EXPECT_TRUE(detect_trap(st, AcquisitionKind::ei, 0.0));
}

TEST(Select, EqualSigmaLcbIsArgminMean) {
  auto post = make_posterior({3.0, 1.0, 2.0, 1.5}, {0.7, 0.7, 0.7, 0.7});
  for (double k : {0.1, 1.0, 3.0, 10.0}) EXPECT_EQ(select_gp_lcb(post, all(4), k), 1u);
}

TEST(Select, AffineRescalingKeepsChoice) {
  auto space = test::crystal_space();
  Rng rng(21);
  KernelConfig cfg;
  for (int rep = 0; rep < 20; ++rep) {
    test::HistoryBuilder a(space.size()), b(space.size());
    for (int i = 0; i < 8; ++i) {
      SetIndex s = uniform_index(rng, 16);
      const double v = 100 + 30 * standard_normal(rng);
      a.add(s, {{"g", v}});
      b.add(s, {{"g", 3.5 * v - 40.0}});
    }
    auto pa = posterior(fit(space, a.get(), "g", cfg), space);
    auto pb = posterior(fit(space, b.get(), "g", cfg), space);
    const double k = kappa(8, 16, 0.1);
    EXPECT_EQ(select_gp_lcb(pa, all(16), k), select_gp_lcb(pb, all(16), k));
    const double fa = pa.mean.minCoeff();
    EXPECT_EQ(select_ei(pa, all(16), fa), select_ei(pb, all(16), 3.5 * fa - 40.0));
  }
}

TEST(Trap, Examples) {
  NtsState st;
  st.update(AcquisitionKind::ei, 0.4);
  EXPECT_FALSE(detect_trap(st, AcquisitionKind::ei, 0.4));
  st.update(AcquisitionKind::ei, 1.0);
  st.update(AcquisitionKind::ei, 0.05);
  EXPECT_EQ(st.ei_max, 1.0);
  EXPECT_TRUE(detect_trap(st, AcquisitionKind::ei, 0.05));
  EXPECT_FALSE(detect_trap(st, AcquisitionKind::ei, 0.1));

  NtsState cv;
  cv.update(AcquisitionKind::gp_lcb, 0.8);
  cv.update(AcquisitionKind::gp_lcb, 0.07);
  EXPECT_TRUE(detect_trap(cv, AcquisitionKind::gp_lcb, 0.07));
  EXPECT_FALSE(detect_trap(cv, AcquisitionKind::gp_lcb, 0.09));
  EXPECT_EQ(cv.ei_max, 0.0);
}

TEST(Escape, GoalOutlierDropsMostTested) {
  test::HistoryBuilder hb(3);
  for (int i = 0; i < 6; ++i) hb.add(0, {{"g", 1.0}});
  for (int i = 0; i < 2; ++i) hb.add(1, {{"g", 2.0}});
  hb.add(2, {{"g", 3.0}});
  std::vector<SetIndex> cand{0, 1, 2};
  std::vector<SetIndex> seen;
  escape_goal_outlier(hb.get(), cand, [&](std::span<const SetIndex> c) {
    seen.assign(c.begin(), c.end());
    return std::optional<SetIndex>(c.front());
  });
  EXPECT_EQ(seen, (std::vector<SetIndex>{1, 2}));
}

TEST(Escape, GoalOutlierFallsBackWhenCountsEqual) {
  test::HistoryBuilder hb(3);
  for (SetIndex s : {0, 1, 2}) hb.add(s, {{"g", 1.0}});
  std::vector<SetIndex> cand{0, 1, 2};
  std::size_t size = 0;
  escape_goal_outlier(hb.get(), cand, [&](std::span<const SetIndex> c) {
    size = c.size();
    return std::optional<SetIndex>(c.front());
  });
  EXPECT_EQ(size, 3u);
}

TEST(Escape, GoalOutlierMovesOffPreviousArgmin) {
  test::HistoryBuilder hb(3);
  for (int i = 0; i < 4; ++i) hb.add(1, {{"g", 1.0}});
  hb.add(0, {{"g", 5.0}});
  hb.add(2, {{"g", 3.0}});
  auto post = make_posterior({5.0, 1.0, 3.0}, {0.1, 0.1, 0.1});
  std::vector<SetIndex> cand{0, 1, 2};
  EXPECT_EQ(select_gp_lcb(post, cand, 2.0), 1u);
  auto got = escape_goal_outlier(hb.get(), cand, [&](std::span<const SetIndex> c) { return select_gp_lcb(post, c, 2.0); });
  EXPECT_EQ(got, 2u);
}

TEST(Escape, DeltaArithmetic) {
  // Goal mean 95 against f_best 100 gives I = 5; constraint LCB is 60 with sigma 0.
  auto goal = make_posterior({95.0}, {0.0});
  auto con = make_posterior({60.0}, {0.0});
  std::vector<ConstraintEscapeInput> cs{{&con, 65.0}};
  EXPECT_NEAR(escape_delta(goal, cs, 0, 100.0, 2.0), 60.0 / 65.0 - 5.0 / 100.0, 1e-12);
  EXPECT_NEAR(escape_delta(goal, cs, 0, 100.0, 2.0), 0.87308, 1e-5);
}

TEST(Escape, ConstraintTieBreakAndOrdering) {
  auto goal = make_posterior({95.0, 95.0, 100.0, 90.0}, {0.0, 0.0, 0.0, 0.0});
  auto con = make_posterior({60.0, 60.0, 200.0, 66.0}, {0.0, 0.0, 0.0, 0.0});
  std::vector<ConstraintEscapeInput> cs{{&con, 65.0}};
  std::vector<SetIndex> tie{1, 0};
  EXPECT_EQ(escape_constraint(goal, cs, tie, 100.0, 1.0), 0u);
  EXPECT_GT(escape_delta(goal, cs, 2, 100.0, 1.0), escape_delta(goal, cs, 3, 100.0, 1.0));
  std::vector<SetIndex> cand{2, 3};
  EXPECT_EQ(escape_constraint(goal, cs, cand, 100.0, 1.0), 3u);
  EXPECT_FALSE(escape_constraint(goal, cs, {}, 100.0, 1.0).has_value());
}

TEST(Escape, MinimumAcrossConstraints) {
  auto goal = make_posterior({95.0}, {0.0});
  auto c1 = make_posterior({60.0}, {0.0});
  auto c2 = make_posterior({10.0}, {0.0});
  std::vector<ConstraintEscapeInput> cs{{&c1, 65.0}, {&c2, 20.0}};
  EXPECT_NEAR(escape_delta(goal, cs, 0, 100.0, 1.0), std::min(60.0 / 65.0, 10.0 / 20.0) - 0.05, 1e-12);
}
