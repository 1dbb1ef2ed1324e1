#pragma once

#include "apex/domain.hpp"

#include <span>
#include <vector>

namespace apex {

/// Order-statistics confidence that the `percentile` quantile of the
/// constraint metric satisfies the (canonical) constraint, given the sample.
///
/// With N values of which l satisfy the bound:
///   beta = sum_{k=0}^{l-1} C(N, k) p^k (1-p)^(N-k)
double robustness_beta(std::span<const double> values, const ConstraintSpec& constraint);

/// Binomial partial sum used by robustness_beta.
double binomial_lower_sum(int n, int l, double p);

/// Lowest beta across constraints; 1 when there are none.
double robustness_beta(const History& history, SetIndex set, const Requirement& canonical);

/// Calibration coefficient sqrt(2 log(|D| n^2 pi^2 / (6 delta))).
double kappa(int n, std::size_t space_size, double delta);

/// best_median - min_{x in D_n} (mu(x) - kappa sigma(x)).
double instant_suboptimality(double best_median, double min_lcb);

/// Fit of the normalized cumulative trend to (1 - e^{-bx}) / (1 - e^{-b}).
struct TrendFit {
  double rate = 0.0;         // b
  double angle_deg = 45.0;   // tangent angle at x = 1 (theta)
  double capped_deg = 45.0;  // min(45, theta)
  double alpha = 0.0;
};

/// Running record of instant and cumulative suboptimality.
class SuboptimalityTrace {
 public:
  void push(double tau);
  std::size_t size() const { return tau_.size(); }
  const std::vector<double>& tau() const { return tau_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  double last_tau() const { return tau_.empty() ? 0.0 : tau_.back(); }

 private:
  std::vector<double> tau_;
  std::vector<double> cumulative_;
};

/// Fits the saturating exponential to `cumulative` and returns the tangent
/// angle at the last point together with alpha = 100 (1 - theta'/45).
/// Fewer than three points give alpha 0; a flat trend gives alpha 100.
TrendFit fit_trend(std::span<const double> cumulative);

double optimality_alpha(const SuboptimalityTrace& trace);
double optimality_alpha(std::span<const double> cumulative);

/// Value-stability baseline: (1 - |f_n - f_{n-1}| / R_g) * 100, clamped.
double alpha_b1(double best_now, double best_prev, double goal_range);

/// Blend of value stability and parameter stability, clamped to [0, 100].
double alpha_b2(double alpha_b1_value, const ParameterSpace& space, SetIndex best_now, SetIndex best_prev,
                double eta = 0.5);

}  // namespace apex
