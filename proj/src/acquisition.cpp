#include "apex/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace apex {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double stddev, double f_best) {
  if (!(stddev > 0.0)) return 0.0;
  const double diff = f_best - mean;
  const double z = diff / stddev;
  double ei;
  if (z < -20.0) {
    // z Phi(z) + phi(z) cancels badly in the tail; use the Mills-ratio series.
    const double inv2 = 1.0 / (z * z);
    ei = stddev * normal_pdf(z) * inv2 *
         (1.0 + inv2 * (-3.0 + inv2 * (15.0 + inv2 * (-105.0 + inv2 * 945.0))));
  } else {
    ei = diff * normal_cdf(z) + stddev * normal_pdf(z);
  }
  return std::max(ei, 0.0);
}

double coefficient_of_variation(double mean, double stddev) { return stddev / std::max(std::abs(mean), 1e-9); }

std::optional<SetIndex> select_gp_lcb(const Posterior& goal, std::span<const SetIndex> candidates, double kappa) {
  std::optional<SetIndex> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (SetIndex x : candidates) {
    const double v = lcb(goal, x, kappa);
    if (!best || v < best_value || (v == best_value && x < *best)) {
      best = x;
      best_value = v;
    }
  }
  return best;
}

std::optional<SetIndex> select_ei(const Posterior& goal, std::span<const SetIndex> candidates, double f_best) {
  std::optional<SetIndex> best;
  double best_value = -1.0;
  for (SetIndex x : candidates) {
    const double v = expected_improvement(goal, x, f_best);
    if (!best || v > best_value || (v == best_value && x < *best)) {
      best = x;
      best_value = v;
    }
  }
  return best;
}

void NtsState::update(AcquisitionKind kind, double score) {
  if (kind == AcquisitionKind::ei)
    ei_max = std::max(ei_max, score);
  else
    cv_max = std::max(cv_max, score);
}

bool detect_trap(const NtsState& state, AcquisitionKind kind, double chosen_score) {
  if (!(chosen_score > 0.0)) return true;
  const double threshold = kind == AcquisitionKind::ei ? state.ei_min() : state.cv_min();
  return chosen_score < threshold;
}

double escape_delta(const Posterior& goal, std::span<const ConstraintEscapeInput> constraints, SetIndex x,
                    double f_best, double kappa) {
  const auto i = static_cast<Eigen::Index>(x);
  const double improvement = f_best - goal.mean(i);
  const double goal_term = improvement / std::max(std::abs(f_best), 1e-9);
  double delta = std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) {
    const double lcb_c = lcb(*c.posterior, x, kappa);
    delta = std::min(delta, lcb_c / std::max(std::abs(c.best), 1e-9) - goal_term);
  }
  return delta;
}

std::optional<SetIndex> escape_constraint(const Posterior& goal, std::span<const ConstraintEscapeInput> constraints,
                                          std::span<const SetIndex> unsatisfying, double f_best, double kappa) {
  if (constraints.empty()) return std::nullopt;
  std::optional<SetIndex> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (SetIndex x : unsatisfying) {
    const double v = escape_delta(goal, constraints, x, f_best, kappa);
    if (!best || v < best_value || (v == best_value && x < *best)) {
      best = x;
      best_value = v;
    }
  }
  return best;
}

}  // namespace apex
