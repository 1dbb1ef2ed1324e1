#include "apex/baselines.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace apex {

Eigen::VectorXd SurrogateLite::features(const Eigen::VectorXd& u) {
  const Eigen::Index b = u.size();
  Eigen::VectorXd f(1 + b + b * (b + 1) / 2);
  Eigen::Index k = 0;
  f(k++) = 1.0;
  for (Eigen::Index q = 0; q < b; ++q) f(k++) = u(q);
  for (Eigen::Index p = 0; p < b; ++p)
    for (Eigen::Index q = p; q < b; ++q) f(k++) = u(p) * u(q);
  return f;
}

SurrogateLite SurrogateLite::fit(const ParameterSpace& space, std::span<const SetIndex> sets,
                                 std::span<const double> values) {
  if (sets.empty() || sets.size() != values.size())
    throw std::invalid_argument("surrogate fit needs matching, non-empty sets and values");
  const auto n = static_cast<Eigen::Index>(sets.size());
  const Eigen::Index width = features(space.normalized(sets[0])).size();
  Eigen::MatrixXd a(n, width);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) = features(space.normalized(sets[static_cast<std::size_t>(i)])).transpose();
    y(i) = values[static_cast<std::size_t>(i)];
  }
  SurrogateLite g;
  // Minimum-norm least squares, so fewer points than coefficients is fine.
  g.coef_ = a.completeOrthogonalDecomposition().solve(y);
  return g;
}

std::optional<SurrogateLite> SurrogateLite::fit(const ParameterSpace& space, const History& history,
                                                const Requirement& canonical) {
  std::vector<SetIndex> sets;
  std::vector<double> values;
  for (SetIndex j : history.observed_sets()) {
    auto v = history.values(j, canonical.goal.name);
    for (double& x : v) x = canonical.canonical_goal(x);
    sets.push_back(j);
    values.push_back(median(std::move(v)));
  }
  if (sets.empty()) return std::nullopt;
  return fit(space, sets, values);
}

double SurrogateLite::operator()(const Eigen::VectorXd& u) const { return features(u).dot(coef_); }

std::optional<SetIndex> argmin_surrogate(const SurrogateLite& g, const ParameterSpace& space,
                                         std::span<const SetIndex> sets) {
  std::optional<SetIndex> best;
  double best_v = std::numeric_limits<double>::infinity();
  for (SetIndex x : sets) {
    const double v = g.at(space, x);
    if (!best || v < best_v || (v == best_v && x < *best)) {
      best = x;
      best_v = v;
    }
  }
  return best;
}

std::optional<SetIndex> gel_select(const SurrogateLite* g, const ParameterSpace& space,
                                   std::span<const SetIndex> d_n, std::span<const SetIndex> fallback, Rng& rng) {
  if (g && !d_n.empty()) return argmin_surrogate(*g, space, d_n);
  if (fallback.empty()) return std::nullopt;
  return fallback[uniform_index(rng, fallback.size())];
}

SetIndex ger_select(int n, std::size_t space_size, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("ger_select: n must be >= 1");
  if (space_size == 0) throw std::invalid_argument("ger_select: empty space");
  const auto k = static_cast<std::size_t>(n - 1);
  const std::uint64_t epoch = k / space_size;
  Rng rng(derive_seed(seed, epoch));
  return random_permutation(space_size, rng)[k % space_size];
}

std::vector<double> guc_scores(const ParameterSpace& space, const History& history) {
  std::vector<double> zeta(space.size(), 0.0);
  for (SetIndex j = 0; j < space.size(); ++j) {
    double z = -2.0 * static_cast<double>(history.count(j));
    for (SetIndex nb : space.neighbors(j)) z -= static_cast<double>(history.count(nb));
    zeta[j] = z;
  }
  return zeta;
}

std::optional<SetIndex> guc_select(const SurrogateLite* g, const ParameterSpace& space, const History& history,
                                   std::span<const SetIndex> d_n, Rng& rng) {
  if (d_n.empty()) return std::nullopt;
  const auto zeta = guc_scores(space, history);
  double top = -std::numeric_limits<double>::infinity();
  for (SetIndex x : d_n) top = std::max(top, zeta[x]);
  std::vector<SetIndex> d_u;
  for (SetIndex x : d_n)
    if (zeta[x] == top) d_u.push_back(x);
  if (g) return argmin_surrogate(*g, space, d_u);
  return d_u[uniform_index(rng, d_u.size())];
}

// ---------------------------------------------------------------------------

QTable::QTable(double learning_rate, double discount) : lr_(learning_rate), gamma_(discount) {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw std::invalid_argument("learning rate must lie in (0, 1]");
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
}

double QTable::value(std::size_t state, std::size_t action) const {
  auto it = q_.find({state, action});
  return it == q_.end() ? 0.0 : it->second;
}

double QTable::best_value(std::size_t state, std::span<const std::size_t> actions) const {
  if (actions.empty()) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a : actions) best = std::max(best, value(state, a));
  return best;
}

double QTable::update(std::size_t state, std::size_t action, double reward, std::size_t next_state,
                      std::span<const std::size_t> next_actions) {
  double& q = q_[{state, action}];
  q += lr_ * (reward + gamma_ * best_value(next_state, next_actions) - q);
  return q;
}

std::size_t QTable::choose(std::size_t state, std::span<const std::size_t> actions, double epsilon,
                           Rng& rng) const {
  if (actions.empty()) throw std::invalid_argument("QTable::choose needs at least one action");
  if (epsilon > 0.0 && uniform01(rng) < epsilon) return actions[uniform_index(rng, actions.size())];
  const double best = best_value(state, actions);
  std::vector<std::size_t> ties;
  for (std::size_t a : actions)
    if (value(state, a) == best) ties.push_back(a);
  return ties.size() == 1 ? ties[0] : ties[uniform_index(rng, ties.size())];
}

void RlSettings::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  QTable(learning_rate, discount);
  if (penalty && !(*penalty >= 0.0)) throw std::invalid_argument("penalty must be >= 0");
}

double rl_reward(const Observation& obs, const Requirement& canonical, double penalty) {
  double r = -canonical.canonical_goal(obs.metric(canonical.goal.name));
  for (const auto& c : canonical.constraints)
    if (!c.satisfied_by(obs.metric(c.metric))) {
      r -= penalty;
      break;
    }
  return r;
}

double goal_range(const History& history, const Requirement& canonical) {
  if (history.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& obs : history.observations()) {
    const double v = canonical.canonical_goal(obs.metric(canonical.goal.name));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

// ---------------------------------------------------------------------------

std::optional<Selection> GelSelector::select(const SelectionContext& ctx) {
  std::vector<SetIndex> d_n;
  for (SetIndex j : observed_satisfying(ctx.history, ctx.requirement))
    if (!ctx.exhausted[j]) d_n.push_back(j);
  const auto g = SurrogateLite::fit(ctx.space, ctx.history, ctx.requirement);
  const auto fallback = available_sets(ctx.exhausted);
  auto x = gel_select(g ? &*g : nullptr, ctx.space, d_n, fallback, ctx.rng);
  if (!x) return std::nullopt;
  return Selection{*x};
}

std::optional<Selection> GerSelector::select(const SelectionContext& ctx) {
  // Walk forward through the visiting order past exhausted sets.
  const std::size_t np = ctx.space.size();
  for (std::size_t k = 0; k < 2 * np; ++k) {
    const SetIndex x = ger_select(ctx.trial + static_cast<int>(k), np, seed_);
    if (!ctx.exhausted[x]) return Selection{x};
  }
  return std::nullopt;
}

std::optional<Selection> GucSelector::select(const SelectionContext& ctx) {
  const auto g = SurrogateLite::fit(ctx.space, ctx.history, ctx.requirement);
  auto x = guc_select(g ? &*g : nullptr, ctx.space, ctx.history, ctx.candidates, ctx.rng);
  if (!x) return std::nullopt;
  return Selection{*x};
}

RlSelector::RlSelector(RlSettings settings)
    : settings_(settings), table_(settings.learning_rate, settings.discount) {
  settings_.validate();
}

std::optional<Selection> RlSelector::select(const SelectionContext& ctx) {
  if (ctx.history.empty()) {
    const auto avail = available_sets(ctx.exhausted);
    if (avail.empty()) return std::nullopt;
    return Selection{avail[uniform_index(ctx.rng, avail.size())]};
  }
  const SetIndex state = ctx.history.back().set_index;
  if (ctx.history.size() > seen_) {
    if (pending_) {
      const double penalty = settings_.penalty ? *settings_.penalty : goal_range(ctx.history, ctx.requirement);
      const double r = rl_reward(ctx.history.back(), ctx.requirement, penalty);
      const std::vector<bool> none(ctx.space.size(), false);
      const auto next = actions(ctx.space, state, none);
      table_.update(pending_->first, pending_->second, r, state, next);
    }
    seen_ = ctx.history.size();
  }
  pending_.reset();
  const auto legal = actions(ctx.space, state, ctx.exhausted);
  if (legal.empty()) return std::nullopt;
  const std::size_t a = table_.choose(state, legal, settings_.epsilon, ctx.rng);
  pending_ = {state, a};
  return Selection{target(ctx.space, state, a)};
}

std::vector<std::size_t> RlStepSelector::actions(const ParameterSpace& space, SetIndex state,
                                                 const std::vector<bool>& exhausted) const {
  std::vector<std::size_t> out;
  if (!exhausted[state]) out.push_back(0);
  const auto idx = space.value_indices(state);
  for (std::size_t q = 0; q < idx.size(); ++q) {
    const std::size_t n = space.defs()[q].values.size();
    if (idx[q] + 1 < n && !exhausted[target(space, state, 1 + 2 * q)]) out.push_back(1 + 2 * q);
    if (idx[q] > 0 && !exhausted[target(space, state, 2 + 2 * q)]) out.push_back(2 + 2 * q);
  }
  return out;
}

SetIndex RlStepSelector::target(const ParameterSpace& space, SetIndex state, std::size_t action) const {
  if (action == 0) return state;
  auto idx = space.value_indices(state);
  const std::size_t q = (action - 1) / 2;
  if ((action - 1) % 2 == 0)
    ++idx.at(q);
  else
    --idx.at(q);
  return space.index_of_value_indices(idx);
}

std::vector<std::size_t> RlAnySelector::actions(const ParameterSpace& space, SetIndex,
                                                const std::vector<bool>& exhausted) const {
  std::vector<std::size_t> out;
  for (SetIndex j = 0; j < space.size(); ++j)
    if (!exhausted[j]) out.push_back(j);
  return out;
}

}  // namespace apex
