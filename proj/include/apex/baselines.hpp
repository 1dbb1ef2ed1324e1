#pragma once

// Comparison strategies: greedy exploitation (GEL), round-robin exploration
// (GER), uncertainty-driven greedy (GUC) and two tabular Q-learning agents
// (RL-Step, RL-Any).

#include "apex/selector.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace apex {

/// Least-squares quadratic g_n over unit-cube coordinates, fitted to the
/// per-set medians of the canonical goal.
class SurrogateLite {
 public:
  /// nullopt when nothing has been observed yet.
  static std::optional<SurrogateLite> fit(const ParameterSpace& space, const History& history,
                                          const Requirement& canonical);
  /// Fit to explicit (set, value) pairs.
  static SurrogateLite fit(const ParameterSpace& space, std::span<const SetIndex> sets,
                           std::span<const double> values);

  double operator()(const Eigen::VectorXd& u) const;
  double at(const ParameterSpace& space, SetIndex set) const { return (*this)(space.normalized(set)); }
  const Eigen::VectorXd& coefficients() const { return coef_; }

  /// 1, u_q, then u_p u_q for p <= q.
  static Eigen::VectorXd features(const Eigen::VectorXd& u);

 private:
  Eigen::VectorXd coef_;
};

/// argmin g_n over `sets`, lowest index on ties.
std::optional<SetIndex> argmin_surrogate(const SurrogateLite& g, const ParameterSpace& space,
                                         std::span<const SetIndex> sets);

/// argmin g_n over D_n; a uniform draw from `fallback` when D_n is empty.
std::optional<SetIndex> gel_select(const SurrogateLite* g, const ParameterSpace& space,
                                   std::span<const SetIndex> d_n, std::span<const SetIndex> fallback, Rng& rng);

/// Set tested at trial n (1-based) by round-robin with a fresh seeded
/// permutation per pass of N_p trials.
SetIndex ger_select(int n, std::size_t space_size, std::uint64_t seed);

/// zeta(x) = -2 count(x) - sum of counts over single-step neighbours.
std::vector<double> guc_scores(const ParameterSpace& space, const History& history);

/// argmin g_n among the highest-zeta members of D_n; random among them when
/// there is no fit.
std::optional<SetIndex> guc_select(const SurrogateLite* g, const ParameterSpace& space, const History& history,
                                   std::span<const SetIndex> d_n, Rng& rng);

/// Tabular action values. Missing entries read as 0.
class QTable {
 public:
  QTable(double learning_rate = 0.1, double discount = 0.9);

  double value(std::size_t state, std::size_t action) const;
  void set(std::size_t state, std::size_t action, double v) { q_[{state, action}] = v; }
  double best_value(std::size_t state, std::span<const std::size_t> actions) const;

  /// Q(s,a) += lr (r + gamma max_a' Q(s',a') - Q(s,a)); returns the new value.
  double update(std::size_t state, std::size_t action, double reward, std::size_t next_state,
                std::span<const std::size_t> next_actions);

  /// Epsilon-greedy over `actions`, ties broken uniformly at random.
  std::size_t choose(std::size_t state, std::span<const std::size_t> actions, double epsilon, Rng& rng) const;

  std::size_t size() const { return q_.size(); }
  double learning_rate() const { return lr_; }
  double discount() const { return gamma_; }

 private:
  double lr_;
  double gamma_;
  std::map<std::pair<std::size_t, std::size_t>, double> q_;
};

struct RlSettings {
  double epsilon = 0.05;
  double learning_rate = 0.1;
  double discount = 0.9;
  /// Constraint-violation penalty; the current goal range when unset.
  std::optional<double> penalty;

  void validate() const;
};

/// -canonical goal, minus the penalty when any constraint is violated.
double rl_reward(const Observation& obs, const Requirement& canonical, double penalty);

/// Range of the canonical goal over all observations (0 when empty).
double goal_range(const History& history, const Requirement& canonical);

class GelSelector : public Selector {
 public:
  std::string name() const override { return "gel"; }
  std::optional<Selection> select(const SelectionContext& ctx) override;
};

class GerSelector : public Selector {
 public:
  explicit GerSelector(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "ger"; }
  bool uses_initial_design() const override { return false; }
  std::optional<Selection> select(const SelectionContext& ctx) override;

 private:
  std::uint64_t seed_;
};

class GucSelector : public Selector {
 public:
  std::string name() const override { return "guc"; }
  std::optional<Selection> select(const SelectionContext& ctx) override;
};

/// Shared Q-learning loop; subclasses define the action set.
class RlSelector : public Selector {
 public:
  explicit RlSelector(RlSettings settings);
  bool uses_initial_design() const override { return false; }
  std::optional<Selection> select(const SelectionContext& ctx) override;
  const QTable& table() const { return table_; }
  QTable& table() { return table_; }

 protected:
  /// Actions available in `state`; only targets that are not exhausted.
  virtual std::vector<std::size_t> actions(const ParameterSpace& space, SetIndex state,
                                           const std::vector<bool>& exhausted) const = 0;
  virtual SetIndex target(const ParameterSpace& space, SetIndex state, std::size_t action) const = 0;

 private:
  RlSettings settings_;
  QTable table_;
  std::size_t seen_ = 0;
  std::optional<std::pair<SetIndex, std::size_t>> pending_;
};

/// Actions: keep the set, or move one parameter one value up or down.
/// Action 0 keeps; 1 + 2q steps parameter q up; 2 + 2q steps it down.
class RlStepSelector : public RlSelector {
 public:
  using RlSelector::RlSelector;
  std::string name() const override { return "rl-step"; }

 protected:
  std::vector<std::size_t> actions(const ParameterSpace& space, SetIndex state,
                                   const std::vector<bool>& exhausted) const override;
  SetIndex target(const ParameterSpace& space, SetIndex state, std::size_t action) const override;
};

/// Actions: jump to any set; the action index is the target set.
class RlAnySelector : public RlSelector {
 public:
  using RlSelector::RlSelector;
  std::string name() const override { return "rl-any"; }

 protected:
  std::vector<std::size_t> actions(const ParameterSpace& space, SetIndex state,
                                   const std::vector<bool>& exhausted) const override;
  SetIndex target(const ParameterSpace&, SetIndex, std::size_t action) const override { return action; }
};

}  // namespace apex
