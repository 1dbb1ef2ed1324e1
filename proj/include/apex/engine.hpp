#pragma once

// The optimization loop: initial design, per-trial analysis (best set,
// suboptimality trend, confidences), termination, next-point selection.

#include "apex/acquisition.hpp"
#include "apex/baselines.hpp"
#include "apex/confidence.hpp"
#include "apex/executor.hpp"
#include "apex/sampling.hpp"
#include "apex/selector.hpp"
#include "apex/surrogate.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace apex {

enum class SelectorKind { apex_lcb, apex_ei, gel, ger, guc, rl_step, rl_any };

const char* to_string(SelectorKind k);
/// Accepts the names printed by to_string; throws std::invalid_argument.
SelectorKind selector_from_string(const std::string& s);
const char* to_string(InitStrategy s);
InitStrategy init_strategy_from_string(const std::string& s);
const char* to_string(EscapeMode m);

/// Settings that determine the per-trial analysis.
struct AnalysisSettings {
  double delta = 0.1;
  KernelConfig kernel{};
  double eta = 0.5;

  void validate() const;
};

struct EngineConfig {
  ParameterSpace space;
  Requirement requirement;
  SelectorKind selector = SelectorKind::apex_lcb;
  int n_init = 6;
  InitStrategy init_strategy = InitStrategy::latin_hypercube;
  /// Tried first, in order.
  std::vector<ParameterSet> suggestions;
  AnalysisSettings analysis{};
  TerminationCriteria termination{};
  RlSettings rl{};
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Raised when no configured termination criterion can ever fire.
class UnsatisfiableTermination : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One row of the per-trial log, written after trial n has been executed.
struct TrialRecord {
  int n = 0;
  SetIndex selected = 0;
  bool initial = false;
  bool trapped = false;
  std::optional<EscapeMode> escape;

  std::optional<SetIndex> best;      // x_n^+
  std::optional<double> best_median;  // canonical goal median at x_n^+
  std::optional<SetIndex> reported;
  std::optional<double> reported_median;  // raw goal units
  double kappa = 0.0;
  std::optional<double> tau;  // empty until a best set exists
  double cumulative = 0.0;
  double angle_deg = 45.0;
  double alpha = 0.0;
  double alpha_b1 = 0.0;
  double alpha_b2 = 0.0;
  double beta = 0.0;
  double goal_range = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

/// Incremental per-trial analysis. Feeding the same observations always
/// yields the same records, so a run can be re-analyzed from its log.
class Analyzer {
 public:
  Analyzer(ParameterSpace space, const Requirement& requirement, AnalysisSettings settings);

  /// `history` must extend the previously seen history by one observation.
  TrialRecord observe(const History& history);

  const std::vector<SetIndex>& satisfying() const { return satisfying_; }
  const std::optional<Posterior>& goal_posterior() const { return goal_; }
  std::optional<SetIndex> best() const { return best_; }
  std::optional<SetIndex> reported() const { return reported_; }
  double kappa() const { return kappa_; }
  /// Median canonical goal at x_n^+, or the worst observed median before one exists.
  double f_best() const { return f_best_; }
  const Requirement& requirement() const { return req_; }
  const ParameterSpace& space() const { return space_; }
  const AnalysisSettings& settings() const { return settings_; }

 private:
  ParameterSpace space_;
  Requirement req_;
  AnalysisSettings settings_;
  SuboptimalityTrace trace_;
  std::vector<SetIndex> satisfying_;
  std::optional<Posterior> goal_;
  std::optional<SetIndex> best_;
  std::optional<double> best_median_;
  std::optional<SetIndex> reported_;
  double kappa_ = 0.0;
  double f_best_ = 0.0;
  std::size_t seen_ = 0;
};

/// Re-runs the analysis over a recorded history.
std::vector<TrialRecord> reanalyze(const ParameterSpace& space, const Requirement& requirement,
                                   const AnalysisSettings& settings, const History& history);

/// argmin median canonical goal over observed members of D_n, lowest index on ties.
std::optional<SetIndex> best_observed(const History& history, const Requirement& canonical,
                                      std::span<const SetIndex> satisfying);

/// The count rule: x_n^+ replaces the previously reported set only when it
/// has at least as many observations.
std::optional<SetIndex> update_reported(const History& history, std::optional<SetIndex> best,
                                        std::optional<SetIndex> previous);

/// Suggestions first (duplicates dropped), then `strategy` fills to n_init.
std::vector<SetIndex> initial_sample(const ParameterSpace& space, std::span<const ParameterSet> suggestions,
                                     InitStrategy strategy, int n_init, Rng& rng);

/// GP-LCB or EI with trap detection and the two alternating escapes.
class ApexSelector : public Selector {
 public:
  explicit ApexSelector(AcquisitionKind kind) : kind_(kind) {}
  std::string name() const override { return kind_ == AcquisitionKind::ei ? "apex-ei" : "apex-lcb"; }
  std::optional<Selection> select(const SelectionContext& ctx) override;
  const NtsState& state() const { return state_; }

 private:
  std::optional<SetIndex> base(const SelectionContext& ctx, std::span<const SetIndex> candidates) const;
  std::optional<SetIndex> escape(const SelectionContext& ctx, EscapeMode mode) const;

  AcquisitionKind kind_;
  NtsState state_;
  int decided_trial_ = 0;
  bool trapped_ = false;
  std::optional<EscapeMode> mode_;
};

std::unique_ptr<Selector> make_selector(const EngineConfig& config);

enum class RunStatus { max_trials, alpha_target, beta_target, aborted };
const char* to_string(RunStatus s);

struct RunResult {
  std::optional<SetIndex> best;
  std::optional<ParameterSet> best_params;
  double alpha = 0.0;
  double beta = 0.0;
  RunStatus status = RunStatus::max_trials;
  std::string error;
  History history;
  std::vector<TrialRecord> trials;
};

/// Runs the loop until a termination criterion fires or the executor fails.
RunResult run(const EngineConfig& config, Executor& executor);

}  // namespace apex
