#pragma once

// Next-test-point selection over a finite candidate list: GP-LCB, expected
// improvement, trap detection and the two escape procedures.

#include "apex/domain.hpp"
#include "apex/surrogate.hpp"

#include <optional>
#include <span>
#include <vector>

namespace apex {

double normal_pdf(double z);
double normal_cdf(double z);

inline double lcb(double mean, double stddev, double kappa) { return mean - kappa * stddev; }
inline double lcb(const Posterior& post, SetIndex x, double kappa) {
  return lcb(post.mean(static_cast<Eigen::Index>(x)), post.stddev(static_cast<Eigen::Index>(x)), kappa);
}

/// (f_best - mu) Phi(Z) + sigma phi(Z), Z = (f_best - mu) / sigma; 0 when sigma = 0.
double expected_improvement(double mean, double stddev, double f_best);
inline double expected_improvement(const Posterior& post, SetIndex x, double f_best) {
  return expected_improvement(post.mean(static_cast<Eigen::Index>(x)), post.stddev(static_cast<Eigen::Index>(x)),
                              f_best);
}

/// sigma / max(|mu|, 1e-9).
double coefficient_of_variation(double mean, double stddev);

/// argmin LCB over candidates, lowest index on ties. Empty list gives nullopt.
std::optional<SetIndex> select_gp_lcb(const Posterior& goal, std::span<const SetIndex> candidates, double kappa);

/// argmax EI over candidates, lowest index on ties.
std::optional<SetIndex> select_ei(const Posterior& goal, std::span<const SetIndex> candidates, double f_best);

enum class AcquisitionKind { gp_lcb, ei };
enum class EscapeMode { goal_outlier, constraint_noise };

/// Running trap-detection state of one optimization run.
struct NtsState {
  double ei_max = 0.0;
  double cv_max = 0.0;
  EscapeMode next_escape = EscapeMode::goal_outlier;

  double ei_min() const { return ei_max / 10.0; }
  double cv_min() const { return cv_max / 10.0; }

  /// Folds `score` into the running maximum for `kind`.
  void update(AcquisitionKind kind, double score);
};

/// True when the selected point's score falls below a tenth of the running
/// maximum (the maximum must already include the current score). A score of
/// exactly zero carries no information and always counts as a trap.
bool detect_trap(const NtsState& state, AcquisitionKind kind, double chosen_score);

/// Drops every candidate with the highest observation count, then applies
/// `select` to the rest; falls back to the full list if nothing remains.
template <typename Selector>
std::optional<SetIndex> escape_goal_outlier(const History& history, std::span<const SetIndex> candidates,
                                            Selector&& select) {
  if (candidates.empty()) return std::nullopt;
  std::size_t max_count = 0;
  for (SetIndex x : candidates) max_count = std::max(max_count, history.count(x));
  std::vector<SetIndex> kept;
  for (SetIndex x : candidates)
    if (history.count(x) != max_count) kept.push_back(x);
  if (kept.empty()) return select(candidates);
  return select(std::span<const SetIndex>(kept));
}

/// Scores for the constraint-noise escape.
struct ConstraintEscapeInput {
  const Posterior* posterior = nullptr;  // canonical constraint metric
  double best = 0.0;                     // f_c+, already capped at the bound
};

/// Delta(x) = LCB_c(x)/|f_c+| - (f_best - mu(x))/|f_best|, minimum over constraints.
double escape_delta(const Posterior& goal, std::span<const ConstraintEscapeInput> constraints, SetIndex x,
                    double f_best, double kappa);

/// argmin Delta over the currently unsatisfying sets, lowest index on ties.
std::optional<SetIndex> escape_constraint(const Posterior& goal, std::span<const ConstraintEscapeInput> constraints,
                                          std::span<const SetIndex> unsatisfying, double f_best, double kappa);

}  // namespace apex
