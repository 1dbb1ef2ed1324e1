#include "apex/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace apex {

namespace {

struct SelectorName {
  SelectorKind kind;
  const char* name;
};
constexpr SelectorName kSelectorNames[] = {
    {SelectorKind::apex_lcb, "apex-lcb"}, {SelectorKind::apex_ei, "apex-ei"}, {SelectorKind::gel, "gel"},
    {SelectorKind::ger, "ger"},           {SelectorKind::guc, "guc"},         {SelectorKind::rl_step, "rl-step"},
    {SelectorKind::rl_any, "rl-any"},
};

}  // namespace

const char* to_string(SelectorKind k) {
  for (const auto& s : kSelectorNames)
    if (s.kind == k) return s.name;
  return "unknown";
}

SelectorKind selector_from_string(const std::string& s) {
  for (const auto& n : kSelectorNames)
    if (s == n.name) return n.kind;
  throw std::invalid_argument("unknown approach '" + s +
                              "' (expected apex-lcb, apex-ei, gel, ger, guc, rl-step or rl-any)");
}

const char* to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::random:
      return "random";
    case InitStrategy::latin_hypercube:
      return "latin-hypercube";
    case InitStrategy::sobol:
      return "sobol";
  }
  return "unknown";
}

InitStrategy init_strategy_from_string(const std::string& s) {
  if (s == "random") return InitStrategy::random;
  if (s == "latin-hypercube") return InitStrategy::latin_hypercube;
  if (s == "sobol") return InitStrategy::sobol;
  throw std::invalid_argument("unknown init strategy '" + s + "' (expected random, latin-hypercube or sobol)");
}

const char* to_string(EscapeMode m) { return m == EscapeMode::goal_outlier ? "goal-outlier" : "constraint-noise"; }

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::max_trials:
      return "max-trials";
    case RunStatus::alpha_target:
      return "alpha-target";
    case RunStatus::beta_target:
      return "beta-target";
    case RunStatus::aborted:
      return "aborted";
  }
  return "unknown";
}

void AnalysisSettings::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  kernel.validate();
}

void EngineConfig::validate() const {
  if (space.size() == 0) throw std::invalid_argument("parameter space is empty");
  requirement.validate();
  if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
  if (static_cast<std::size_t>(n_init) > space.size())
    throw std::invalid_argument("n_init (" + std::to_string(n_init) + ") exceeds the number of parameter sets (" +
                                std::to_string(space.size()) + ")");
  for (const auto& s : suggestions)
    if (!space.find(s)) throw std::invalid_argument("suggested parameter set is not part of the space");
  analysis.validate();
  termination.validate();
  rl.validate();
}

// ---------------------------------------------------------------------------

std::optional<SetIndex> best_observed(const History& history, const Requirement& canonical,
                                      std::span<const SetIndex> satisfying) {
  std::optional<SetIndex> best;
  double best_v = std::numeric_limits<double>::infinity();
  for (SetIndex x : satisfying) {
    if (history.count(x) == 0) continue;
    auto v = history.values(x, canonical.goal.name);
    for (double& y : v) y = canonical.canonical_goal(y);
    const double m = median(std::move(v));
    if (!best || m < best_v) {
      best = x;
      best_v = m;
    }
  }
  return best;
}

std::optional<SetIndex> update_reported(const History& history, std::optional<SetIndex> best,
                                        std::optional<SetIndex> previous) {
  if (!best) return previous;
  if (!previous || history.count(*best) >= history.count(*previous)) return best;
  return previous;
}

namespace {

double canonical_goal_median(const History& history, const Requirement& req, SetIndex x) {
  auto v = history.values(x, req.goal.name);
  for (double& y : v) y = req.canonical_goal(y);
  return median(std::move(v));
}

}  // namespace

Analyzer::Analyzer(ParameterSpace space, const Requirement& requirement, AnalysisSettings settings)
    : space_(std::move(space)), req_(canonicalize(requirement)), settings_(settings) {
  settings_.validate();
  for (SetIndex j = 0; j < space_.size(); ++j) satisfying_.push_back(j);
}

TrialRecord Analyzer::observe(const History& history) {
  if (history.size() != seen_ + 1) throw std::logic_error("Analyzer::observe expects exactly one new observation");
  seen_ = history.size();
  const int n = static_cast<int>(history.size());

  TrialRecord rec;
  rec.n = n;
  rec.selected = history.back().set_index;

  satisfying_ = filter_satisfying(history, req_);
  const auto best = best_observed(history, req_, satisfying_);
  reported_ = update_reported(history, best, reported_);

  try {
    goal_ = posterior(fit(space_, history, req_.goal.name, settings_.kernel, req_.goal.sign), space_);
  } catch (const FitError&) {
    goal_.reset();
  }
  kappa_ = apex::kappa(n, space_.size(), settings_.delta);
  rec.kappa = kappa_;

  std::optional<double> best_median;
  if (best) best_median = canonical_goal_median(history, req_, *best);
  if (best && goal_) {
    double min_lcb = std::numeric_limits<double>::infinity();
    for (SetIndex x : satisfying_) min_lcb = std::min(min_lcb, lcb(*goal_, x, kappa_));
    trace_.push(instant_suboptimality(*best_median, min_lcb));
  } else if (trace_.size() > 0) {
    trace_.push(trace_.last_tau());
  }
  if (trace_.size() > 0) {
    rec.tau = trace_.last_tau();
    rec.cumulative = trace_.cumulative().back();
  }
  const TrendFit trend = fit_trend(trace_.cumulative());
  rec.angle_deg = trend.angle_deg;
  rec.alpha = trend.alpha;

  rec.goal_range = goal_range(history, req_);
  if (best && best_) {
    rec.alpha_b1 = alpha_b1(*best_median, *best_median_, rec.goal_range);
    rec.alpha_b2 = alpha_b2(rec.alpha_b1, space_, *best, *best_, settings_.eta);
  }

  rec.best = best;
  rec.best_median = best_median;
  rec.reported = reported_;
  if (reported_) {
    rec.reported_median = median(history.values(*reported_, req_.goal.name));
    rec.beta = robustness_beta(history, *reported_, req_);
  }

  if (best) {
    f_best_ = *best_median;
  } else {
    f_best_ = -std::numeric_limits<double>::infinity();
    for (SetIndex x : history.observed_sets()) f_best_ = std::max(f_best_, canonical_goal_median(history, req_, x));
  }
  best_ = best;
  best_median_ = best_median;
  return rec;
}

std::vector<TrialRecord> reanalyze(const ParameterSpace& space, const Requirement& requirement,
                                   const AnalysisSettings& settings, const History& history) {
  Analyzer analyzer(space, requirement, settings);
  History h(space.size());
  std::vector<TrialRecord> out;
  for (const auto& obs : history.observations()) {
    h.append(obs);
    out.push_back(analyzer.observe(h));
  }
  return out;
}

std::vector<SetIndex> initial_sample(const ParameterSpace& space, std::span<const ParameterSet> suggestions,
                                     InitStrategy strategy, int n_init, Rng& rng) {
  if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
  if (static_cast<std::size_t>(n_init) > space.size())
    throw std::invalid_argument("n_init exceeds the number of parameter sets");
  std::vector<SetIndex> out;
  for (const auto& s : suggestions) {
    if (out.size() == static_cast<std::size_t>(n_init)) break;
    const SetIndex j = space.index_of(s);
    if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
  }
  const auto fill = design(space, strategy, static_cast<std::size_t>(n_init) - out.size(), out, rng);
  out.insert(out.end(), fill.begin(), fill.end());
  return out;
}

// ---------------------------------------------------------------------------

std::optional<SetIndex> ApexSelector::base(const SelectionContext& ctx, std::span<const SetIndex> candidates) const {
  if (kind_ == AcquisitionKind::ei) return select_ei(*ctx.goal, candidates, ctx.f_best);
  return select_gp_lcb(*ctx.goal, candidates, ctx.kappa);
}

std::optional<SetIndex> ApexSelector::escape(const SelectionContext& ctx, EscapeMode mode) const {
  if (mode == EscapeMode::goal_outlier)
    return escape_goal_outlier(ctx.history, ctx.candidates,
                               [&](std::span<const SetIndex> c) { return base(ctx, c); });

  const auto unsatisfying = unsatisfying_sets(ctx);
  if (unsatisfying.empty() || ctx.requirement.constraints.empty()) return std::nullopt;
  std::vector<Posterior> posts;
  std::vector<ConstraintEscapeInput> inputs;
  posts.reserve(ctx.requirement.constraints.size());
  for (const auto& c : ctx.requirement.constraints) {
    try {
      posts.push_back(posterior(fit(ctx.space, ctx.history, c.metric, ctx.kernel, c.sign), ctx.space));
    } catch (const FitError&) {
      return std::nullopt;
    }
    double best = std::numeric_limits<double>::infinity();
    for (SetIndex x : unsatisfying)
      for (double v : ctx.history.values(x, c.metric)) best = std::min(best, c.canonical(v));
    inputs.push_back({nullptr, std::max(best, c.bound)});
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) inputs[i].posterior = &posts[i];
  return escape_constraint(*ctx.goal, inputs, unsatisfying, ctx.f_best, ctx.kappa);
}

std::optional<Selection> ApexSelector::select(const SelectionContext& ctx) {
  if (!ctx.goal) return std::nullopt;

  if (ctx.trial != decided_trial_) {
    decided_trial_ = ctx.trial;
    trapped_ = false;
    mode_.reset();
    if (const auto first = base(ctx, ctx.candidates)) {
      const auto i = static_cast<Eigen::Index>(*first);
      const double score = kind_ == AcquisitionKind::ei
                               ? expected_improvement(*ctx.goal, *first, ctx.f_best)
                               : coefficient_of_variation(ctx.goal->mean(i), ctx.goal->stddev(i));
      state_.update(kind_, score);
      trapped_ = detect_trap(state_, kind_, score);
      if (trapped_) {
        mode_ = state_.next_escape;
        state_.next_escape =
            *mode_ == EscapeMode::goal_outlier ? EscapeMode::constraint_noise : EscapeMode::goal_outlier;
      } else {
        state_.next_escape = EscapeMode::goal_outlier;
      }
    }
  }

  std::optional<SetIndex> choice;
  std::optional<EscapeMode> used;
  if (mode_) {
    choice = escape(ctx, *mode_);
    if (choice) used = mode_;
  }
  if (!choice) choice = base(ctx, ctx.candidates);
  if (!choice) {
    // D_n has nothing left to test; look among the unsatisfying sets.
    choice = escape(ctx, EscapeMode::constraint_noise);
    if (choice) used = EscapeMode::constraint_noise;
  }
  if (!choice) return std::nullopt;
  return Selection{*choice, trapped_, used};
}

std::unique_ptr<Selector> make_selector(const EngineConfig& config) {
  switch (config.selector) {
    case SelectorKind::apex_lcb:
      return std::make_unique<ApexSelector>(AcquisitionKind::gp_lcb);
    case SelectorKind::apex_ei:
      return std::make_unique<ApexSelector>(AcquisitionKind::ei);
    case SelectorKind::gel:
      return std::make_unique<GelSelector>();
    case SelectorKind::ger:
      return std::make_unique<GerSelector>(derive_seed(config.seed, "ger"));
    case SelectorKind::guc:
      return std::make_unique<GucSelector>();
    case SelectorKind::rl_step:
      return std::make_unique<RlStepSelector>(config.rl);
    case SelectorKind::rl_any:
      return std::make_unique<RlAnySelector>(config.rl);
  }
  throw std::invalid_argument("unknown selector");
}

// ---------------------------------------------------------------------------

namespace {

void check_metrics(const Metrics& m, const Requirement& req) {
  for (const auto& name : req.metric_names()) {
    auto it = m.find(name);
    if (it == m.end()) throw ExecutorError("trial result lacks metric '" + name + "'");
    if (!std::isfinite(it->second)) throw ExecutorError("trial result has a non-finite value for '" + name + "'");
  }
}

}  // namespace

RunResult run(const EngineConfig& config, Executor& executor) {
  config.validate();
  if (config.termination.unsatisfiable())
    throw UnsatisfiableTermination("no termination criterion can be reached (set max_trials or a reachable target)");

  const Requirement req = canonicalize(config.requirement);
  const ParameterSpace& space = config.space;
  Rng rng(derive_seed(config.seed, "engine"));
  auto selector = make_selector(config);
  const std::vector<SetIndex> init =
      selector->uses_initial_design()
          ? initial_sample(space, config.suggestions, config.init_strategy, config.n_init, rng)
          : std::vector<SetIndex>{};

  Analyzer analyzer(space, req, config.analysis);
  RunResult result;
  result.history = History(space.size());
  History& history = result.history;
  std::vector<bool> exhausted(space.size(), false);
  const auto& term = config.termination;

  try {
    for (;;) {
      const std::size_t n = history.size();
      const int trial = static_cast<int>(n) + 1;
      Selection sel;
      bool initial = false;
      std::optional<Metrics> metrics;
      for (;;) {
        for (SetIndex j = 0; j < space.size(); ++j) exhausted[j] = exhausted[j] || executor.exhausted(j);
        const auto available = available_sets(exhausted);
        if (available.empty()) throw DatasetExhausted();
        std::optional<Selection> pick;
        if (n < init.size()) {
          initial = true;
          if (!exhausted[init[n]]) pick = Selection{init[n]};
        } else {
          std::vector<SetIndex> candidates;
          for (SetIndex x : analyzer.satisfying())
            if (!exhausted[x]) candidates.push_back(x);
          SelectionContext ctx{space, req, history, analyzer.satisfying(), candidates, exhausted, trial, rng};
          if (analyzer.goal_posterior()) ctx.goal = &*analyzer.goal_posterior();
          ctx.kappa = analyzer.kappa();
          ctx.f_best = analyzer.f_best();
          ctx.kernel = config.analysis.kernel;
          pick = selector->select(ctx);
          if (pick && exhausted[pick->set]) pick.reset();
        }
        sel = pick ? *pick : Selection{available[uniform_index(rng, available.size())]};
        metrics = executor.run_trial(sel.set, trial);
        if (metrics) break;
        exhausted[sel.set] = true;
      }
      check_metrics(*metrics, req);
      history.append({trial, sel.set, std::move(*metrics)});

      TrialRecord rec = analyzer.observe(history);
      rec.initial = initial;
      rec.trapped = sel.trapped;
      rec.escape = sel.escape;
      result.trials.push_back(rec);

      const bool past_init = history.size() >= init.size();
      if (past_init && term.alpha_target && rec.alpha >= *term.alpha_target) {
        result.status = RunStatus::alpha_target;
        break;
      }
      if (past_init && term.beta_target && rec.reported && rec.beta >= *term.beta_target) {
        result.status = RunStatus::beta_target;
        break;
      }
      if (term.max_trials && history.size() >= static_cast<std::size_t>(*term.max_trials)) {
        result.status = RunStatus::max_trials;
        break;
      }
    }
  } catch (const ExecutorError& e) {
    result.status = RunStatus::aborted;
    result.error = e.what();
  }

  result.best = analyzer.reported();
  if (result.best) result.best_params = space.set_of(*result.best);
  if (!result.trials.empty()) {
    result.alpha = result.trials.back().alpha;
    result.beta = result.trials.back().beta;
  }
  return result;
}

}  // namespace apex
