#include "apex/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace apex {

double binomial_lower_sum(int n, int l, double p) {
  if (n < 0 || l < 0 || l > n) throw std::invalid_argument("binomial_lower_sum: need 0 <= l <= n");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("binomial_lower_sum: p must lie in (0, 1)");
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = std::lgamma(n + 1.0);
  double sum = 0.0;
  for (int k = 0; k < l; ++k) {
    const double log_term =
        log_n_fact - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * log_p + (n - k) * log_q;
    sum += std::exp(log_term);
  }
  return std::clamp(sum, 0.0, 1.0);
}

double robustness_beta(std::span<const double> values, const ConstraintSpec& constraint) {
  if (values.empty()) throw std::invalid_argument("robustness_beta needs at least one value");
  const int n = static_cast<int>(values.size());
  const int l = static_cast<int>(
      std::count_if(values.begin(), values.end(), [&](double v) { return constraint.satisfied_by(v); }));
  return binomial_lower_sum(n, l, constraint.percentile);
}

double robustness_beta(const History& history, SetIndex set, const Requirement& canonical) {
  if (history.count(set) == 0) return 0.0;
  double beta = 1.0;
  for (const auto& c : canonical.constraints) {
    const auto values = history.values(set, c.metric);
    beta = std::min(beta, robustness_beta(values, c));
  }
  return beta;
}

double kappa(int n, std::size_t space_size, double delta) {
  if (n < 1) throw std::invalid_argument("kappa: n must be >= 1");
  if (space_size < 1) throw std::invalid_argument("kappa: space must be non-empty");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("kappa: delta must lie in (0, 1)");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double nn = static_cast<double>(n);
  return std::sqrt(2.0 * std::log(static_cast<double>(space_size) * nn * nn * pi2 / (6.0 * delta)));
}

double instant_suboptimality(double best_median, double min_lcb) { return best_median - min_lcb; }

void SuboptimalityTrace::push(double tau) {
  if (!std::isfinite(tau)) throw std::invalid_argument("suboptimality must be finite");
  tau_.push_back(tau);
  cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + tau);
}

namespace {

constexpr double kMinRate = 0.01;
constexpr double kMaxRate = 100.0;

double saturating(double b, double x) { return std::expm1(-b * x) / std::expm1(-b); }

double sse(double b, std::span<const double> xs, std::span<const double> ys) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - saturating(b, xs[i]);
    s += r * r;
  }
  return s;
}

TrendFit finish(double b) {
  TrendFit fit;
  fit.rate = b;
  const double slope = b / std::expm1(b);
  fit.angle_deg = std::atan(slope) * 180.0 / std::numbers::pi;
  fit.capped_deg = std::min(45.0, fit.angle_deg);
  fit.alpha = std::clamp(100.0 * (1.0 - fit.capped_deg / 45.0), 0.0, 100.0);
  return fit;
}

}  // namespace

TrendFit fit_trend(std::span<const double> cumulative) {
  const std::size_t n = cumulative.size();
  if (n < 3) return TrendFit{};

  const auto [lo_it, hi_it] = std::minmax_element(cumulative.begin(), cumulative.end());
  const double lo = *lo_it;
  const double spread = *hi_it - lo;
  const double scale = std::max({1.0, std::abs(*lo_it), std::abs(*hi_it)});
  if (!(spread > 1e-12 * scale)) {
    TrendFit flat;
    flat.rate = kMaxRate;
    flat.angle_deg = 0.0;
    flat.capped_deg = 0.0;
    flat.alpha = 100.0;
    return flat;
  }

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    ys[i] = (cumulative[i] - lo) / spread;
  }

  // Coarse scan in log(b), then golden-section search around the best node.
  constexpr int kGrid = 97;
  const double log_lo = std::log(kMinRate);
  const double log_hi = std::log(kMaxRate);
  const double step = (log_hi - log_lo) / (kGrid - 1);
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int g = 0; g < kGrid; ++g) {
    const double s = sse(std::exp(log_lo + g * step), xs, ys);
    if (s < best_sse) {
      best_sse = s;
      best = g;
    }
  }
  double a = log_lo + std::max(best - 1, 0) * step;
  double c = log_lo + std::min(best + 1, kGrid - 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - inv_phi * (c - a);
  double x2 = a + inv_phi * (c - a);
  double f1 = sse(std::exp(x1), xs, ys);
  double f2 = sse(std::exp(x2), xs, ys);
  for (int it = 0; it < 60 && (c - a) > 1e-10; ++it) {
    if (f1 <= f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - inv_phi * (c - a);
      f1 = sse(std::exp(x1), xs, ys);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (c - a);
      f2 = sse(std::exp(x2), xs, ys);
    }
  }
  double log_b = 0.5 * (a + c);
  if (best_sse < sse(std::exp(log_b), xs, ys)) log_b = log_lo + best * step;
  return finish(std::exp(log_b));
}

double optimality_alpha(std::span<const double> cumulative) { return fit_trend(cumulative).alpha; }

double optimality_alpha(const SuboptimalityTrace& trace) { return optimality_alpha(trace.cumulative()); }

double alpha_b1(double best_now, double best_prev, double goal_range) {
  if (!(goal_range > 0.0)) return 100.0;
  return std::clamp((1.0 - std::abs(best_now - best_prev) / goal_range) * 100.0, 0.0, 100.0);
}

double alpha_b2(double alpha_b1_value, const ParameterSpace& space, SetIndex best_now, SetIndex best_prev,
                double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("alpha_b2: eta must lie in (0, 1)");
  const double d_max = space.max_distance();
  const double d = normalized_distance(space, best_now, best_prev);
  const double param_term = d_max > 0.0 ? 1.0 - d / d_max : 1.0;
  const double v = (eta * alpha_b1_value / 100.0 + (1.0 - eta) * param_term) * 100.0;
  return std::clamp(v, 0.0, 100.0);
}

}  // namespace apex
