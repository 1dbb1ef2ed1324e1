#include "apex/engine.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>

using namespace apex;

namespace {

/// Noise-free energy bowl with prr rising in tx_power; prr >= 65 holds on
/// the upper half of the tx_power axis.
SyntheticSpec planted_landscape(double noise = 0.0) {
  SyntheticSpec spec;
  Landscape e;
  e.kind = Landscape::Kind::quadratic;
  e.offset = 20;
  e.scale = 100;
  e.center = {0.4, 0.3};
  e.noise_std = noise;
  Landscape p;
  p.kind = Landscape::Kind::linear;
  p.offset = 40;
  p.weights = {50, 5};
  p.noise_std = noise / 10.0;
  spec.metrics["energy"] = e;
  spec.metrics["prr"] = p;
  spec.seed = 3;
  return spec;
}

EngineConfig base_config(SelectorKind kind = SelectorKind::apex_lcb) {
  EngineConfig c;
  c.space = test::crystal_space();
  c.requirement = test::crystal_requirement();
  c.selector = kind;
  c.termination.max_trials = 30;
  c.seed = 7;
  return c;
}

std::vector<SetIndex> trajectory(const RunResult& r) {
  std::vector<SetIndex> v;
  for (const auto& o : r.history.observations()) v.push_back(o.set_index);
  return v;
}

}  // namespace

TEST(InitialSample, SixSuggestionsKeptInOrder) {
  auto space = test::crystal_space();
  std::vector<ParameterSet> s;
  for (SetIndex j : {14u, 2u, 7u, 0u, 9u, 11u}) s.push_back(space.set_of(j));
  Rng rng(1);
  EXPECT_EQ(initial_sample(space, s, InitStrategy::random, 6, rng), (std::vector<SetIndex>{14, 2, 7, 0, 9, 11}));
}

TEST(InitialSample, TwoSuggestionsThenFill) {
  auto space = test::crystal_space();
  std::vector<ParameterSet> s{space.set_of(5), space.set_of(5), space.set_of(10)};
  Rng rng(2);
  auto d = initial_sample(space, s, InitStrategy::random, 6, rng);
  ASSERT_EQ(d.size(), 6u);
  EXPECT_EQ(d[0], 5u);
  EXPECT_EQ(d[1], 10u);
  EXPECT_EQ(std::set<SetIndex>(d.begin(), d.end()).size(), 6u);
}

TEST(InitialSample, UnknownSuggestionRejected) {
  auto space = test::crystal_space();
  std::vector<ParameterSet> s{ParameterSet{{-2.0, 1.0}}};
  Rng rng(3);
  EXPECT_THROW(initial_sample(space, s, InitStrategy::random, 6, rng), std::invalid_argument);
}

TEST(Satisfying, OptimisticStartIsWholeSpace) {
  auto req = canonicalize(test::crystal_requirement());
  History h(16);
  std::vector<SetIndex> all(16);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(filter_satisfying(h, req), all);
}

TEST(Satisfying, MedianDecides) {
  auto req = canonicalize(test::crystal_requirement());
  test::HistoryBuilder hb(16);
  hb.add(3, {{"energy", 1}, {"prr", 60}}).add(3, {{"energy", 1}, {"prr", 70}}).add(3, {{"energy", 1}, {"prr", 70}});
  hb.add(4, {{"energy", 1}, {"prr", 50}}).add(4, {{"energy", 1}, {"prr", 64}});
  auto d = filter_satisfying(hb.get(), req);
  EXPECT_TRUE(std::count(d.begin(), d.end(), 3u));
  EXPECT_FALSE(std::count(d.begin(), d.end(), 4u));
  EXPECT_EQ(d.size(), 15u);
  EXPECT_EQ(observed_satisfying(hb.get(), req), (std::vector<SetIndex>{3}));
}

TEST(CountRule, HoldsUntilChallengerHasAsManyResults) {
  auto req = canonicalize(test::crystal_requirement());
  // A = set 0 (median 5, two results), B = set 1 (median 4, one result).
  test::HistoryBuilder hb(16);
  hb.add(0, {{"energy", 5}, {"prr", 70}}).add(0, {{"energy", 5}, {"prr", 70}}).add(1, {{"energy", 4}, {"prr", 70}});
  auto sat = filter_satisfying(hb.get(), req);
  auto best = best_observed(hb.get(), req, sat);
  EXPECT_EQ(best, 1u);
  EXPECT_EQ(update_reported(hb.get(), best, 0u), 0u);
  hb.add(1, {{"energy", 4}, {"prr", 70}});
  EXPECT_EQ(update_reported(hb.get(), best_observed(hb.get(), req, sat), 0u), 1u);
}

TEST(CountRule, NoSatisfyingSetKeepsReported) {
  EXPECT_EQ(update_reported(History(16), std::nullopt, 4u), 4u);
  EXPECT_EQ(update_reported(History(16), std::nullopt, std::nullopt), std::nullopt);
}

TEST(CountRule, ReportedCountNeverDecreases) {
  for (auto kind : {SelectorKind::apex_lcb, SelectorKind::apex_ei, SelectorKind::gel}) {
    auto cfg = base_config(kind);
    cfg.termination.max_trials = 40;
    SyntheticExecutor ex(cfg.space, planted_landscape(8.0));
    auto r = run(cfg, ex);
    std::size_t prev = 0;
    for (const auto& t : r.trials) {
      if (!t.reported) continue;
      const std::size_t c = r.history.prefix(static_cast<std::size_t>(t.n)).count(*t.reported);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(Engine, MaxTrialsEqualToInitialDesign) {
  auto cfg = base_config();
  cfg.termination.max_trials = cfg.n_init;
  SyntheticExecutor ex(cfg.space, planted_landscape());
  auto r = run(cfg, ex);
  ASSERT_EQ(r.history.size(), 6u);
  EXPECT_EQ(r.status, RunStatus::max_trials);
  for (const auto& t : r.trials) EXPECT_TRUE(t.initial);
  // Best is the lowest-energy satisfying set among the six.
  const auto req = canonicalize(cfg.requirement);
  auto want = best_observed(r.history, req, filter_satisfying(r.history, req));
  EXPECT_EQ(r.best, want);
}

TEST(Engine, OneTrialPerIteration) {
  auto cfg = base_config(SelectorKind::apex_ei);
  SyntheticExecutor ex(cfg.space, planted_landscape(5.0));
  auto r = run(cfg, ex);
  ASSERT_EQ(r.history.size(), 30u);
  ASSERT_EQ(r.trials.size(), 30u);
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    EXPECT_EQ(r.trials[i].n, static_cast<int>(i) + 1);
    EXPECT_EQ(r.trials[i].selected, r.history[i].set_index);
  }
}

TEST(Engine, NoiselessRunIsReproducible) {
  for (auto kind : {SelectorKind::apex_lcb, SelectorKind::apex_ei, SelectorKind::gel, SelectorKind::ger,
                    SelectorKind::guc, SelectorKind::rl_step, SelectorKind::rl_any}) {
    auto cfg = base_config(kind);
    SyntheticExecutor a(cfg.space, planted_landscape()), b(cfg.space, planted_landscape());
    auto ra = run(cfg, a);
    auto rb = run(cfg, b);
    EXPECT_EQ(trajectory(ra), trajectory(rb)) << to_string(kind);
    EXPECT_EQ(ra.trials, rb.trials) << to_string(kind);
  }
}

TEST(Engine, FindsPlantedOptimumWithoutNoise) {
  // Satisfying sets are tx_power in {-1, 0}; the bowl centre favours tx_power -1, n_tx 2.
  auto cfg = base_config();
  SyntheticExecutor ex(cfg.space, planted_landscape());
  auto r = run(cfg, ex);
  SyntheticExecutor probe(cfg.space, planted_landscape());
  SetIndex truth = 0;
  double best = 1e300;
  for (SetIndex j = 0; j < 16; ++j) {
    auto m = *probe.run_trial(j, 1);
    if (m.at("prr") >= 65 && m.at("energy") < best) {
      best = m.at("energy");
      truth = j;
    }
  }
  EXPECT_EQ(r.best, truth);
}

TEST(Engine, AnalysisReplaysFromLog) {
  auto cfg = base_config(SelectorKind::apex_ei);
  SyntheticExecutor ex(cfg.space, planted_landscape(6.0));
  auto r = run(cfg, ex);
  auto again = reanalyze(cfg.space, cfg.requirement, cfg.analysis, r.history);
  ASSERT_EQ(again.size(), r.trials.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    auto want = r.trials[i];
    auto got = again[i];
    // Selection details are not part of the analysis.
    got.selected = want.selected;
    got.initial = want.initial;
    got.trapped = want.trapped;
    got.escape = want.escape;
    EXPECT_EQ(got, want) << "trial " << i + 1;
  }
}

TEST(Engine, BetaTargetNeedsSixSatisfyingResults) {
  auto cfg = base_config();
  cfg.termination = {};
  cfg.termination.beta_target = 0.98;
  cfg.termination.max_trials = 200;
  SyntheticExecutor ex(cfg.space, planted_landscape(4.0));
  auto r = run(cfg, ex);
  ASSERT_EQ(r.status, RunStatus::beta_target);
  ASSERT_TRUE(r.best.has_value());
  int ok = 0;
  for (const auto& o : r.history.observations())
    if (o.set_index == *r.best && o.metric("prr") >= 65.0) ++ok;
  EXPECT_GE(ok, 6);
  EXPECT_GE(r.beta, 63.0 / 64.0);
  for (const auto& t : r.trials)
    if (t.n < static_cast<int>(r.trials.size())) EXPECT_LT(t.beta, 0.98);
}

TEST(Engine, UnreachableAlphaRejected) {
  auto cfg = base_config();
  cfg.termination = {};
  cfg.termination.alpha_target = 101.0;
  SyntheticExecutor ex(cfg.space, planted_landscape());
  EXPECT_THROW(run(cfg, ex), UnsatisfiableTermination);
}

TEST(Engine, ExhaustedSetsAreSkipped) {
  // Two records per set: the engine must move on instead of retesting.
  TraceDataset data(test::crystal_space());
  SyntheticExecutor gen(data.space(), planted_landscape(3.0));
  int t = 1;
  for (SetIndex j = 0; j < 16; ++j)
    for (int k = 0; k < 2; ++k) data.add(j, {*gen.run_trial(j, t++), "", 0});
  auto cfg = base_config();
  cfg.termination.max_trials = 32;
  ReplayExecutor ex(data, 4);
  auto r = run(cfg, ex);
  EXPECT_EQ(r.history.size(), 32u);
  for (SetIndex j = 0; j < 16; ++j) EXPECT_EQ(r.history.count(j), 2u);
}

TEST(Engine, DatasetExhaustionAbortsWithPartialResult) {
  TraceDataset data(test::crystal_space());
  SyntheticExecutor gen(data.space(), planted_landscape());
  for (SetIndex j = 0; j < 16; ++j) data.add(j, {*gen.run_trial(j, 1), "", 0});
  auto cfg = base_config();
  cfg.termination.max_trials = 40;
  ReplayExecutor ex(data, 4);
  auto r = run(cfg, ex);
  EXPECT_EQ(r.status, RunStatus::aborted);
  EXPECT_FALSE(r.error.empty());
  EXPECT_EQ(r.history.size(), 16u);
}

TEST(Escapes, AlternateOnConsecutiveTraps) {
  auto space = test::crystal_space();
  auto req = canonicalize(test::crystal_requirement());
  test::HistoryBuilder hb(16);
  for (SetIndex j : {0u, 1u, 2u, 3u}) hb.add(j, {{"energy", 5.0 + static_cast<double>(j)}, {"prr", 50.0}});
  for (SetIndex j : {8u, 9u, 9u}) hb.add(j, {{"energy", 10.0}, {"prr", 80.0}});
  auto sat = filter_satisfying(hb.get(), req);
  std::vector<bool> exhausted(16, false);
  Posterior flat{Eigen::VectorXd::Constant(16, 10.0), Eigen::VectorXd::Zero(16)};
  Rng rng(1);
  ApexSelector sel(AcquisitionKind::ei);
  std::vector<std::optional<EscapeMode>> modes;
  for (int trial = 8; trial < 12; ++trial) {
    SelectionContext ctx{space, req, hb.get(), sat, sat, exhausted, trial, rng, &flat, 2.0, 10.0};
    auto s = sel.select(ctx);
    ASSERT_TRUE(s.has_value());
    EXPECT_TRUE(s->trapped);
    modes.push_back(s->escape);
  }
  EXPECT_EQ(modes[0], EscapeMode::goal_outlier);
  EXPECT_EQ(modes[1], EscapeMode::constraint_noise);
  EXPECT_EQ(modes[2], EscapeMode::goal_outlier);
  EXPECT_EQ(modes[3], EscapeMode::constraint_noise);
}

TEST(Escapes, GoalOutlierAvoidsMostTestedSet) {
  auto space = test::crystal_space();
  auto req = canonicalize(test::crystal_requirement());
  test::HistoryBuilder hb(16);
  for (SetIndex j : {8u, 9u, 9u, 9u}) hb.add(j, {{"energy", 10.0}, {"prr", 80.0}});
  std::vector<SetIndex> cand{8, 9};
  std::vector<bool> exhausted(16, false);
  Posterior p{Eigen::VectorXd::Constant(16, 10.0), Eigen::VectorXd::Zero(16)};
  Rng rng(1);
  ApexSelector sel(AcquisitionKind::ei);
  SelectionContext ctx{space, req, hb.get(), cand, cand, exhausted, 5, rng, &p, 2.0, 10.0};
  auto s = sel.select(ctx);
  ASSERT_TRUE(s && s->trapped);
  EXPECT_EQ(s->set, 8u);
}

TEST(Config, ValidationErrors) {
  auto cfg = base_config();
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_init = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.analysis.delta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.termination = {};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Names, RoundTrip) {
  for (auto k : {SelectorKind::apex_lcb, SelectorKind::apex_ei, SelectorKind::gel, SelectorKind::ger,
                 SelectorKind::guc, SelectorKind::rl_step, SelectorKind::rl_any})
    EXPECT_EQ(selector_from_string(to_string(k)), k);
  EXPECT_THROW(selector_from_string("bogus"), std::invalid_argument);
  EXPECT_EQ(init_strategy_from_string("sobol"), InitStrategy::sobol);
}
