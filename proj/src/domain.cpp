#include "apex/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace apex {

namespace {

double transform(Scale scale, double v) {
  return scale == Scale::log2 ? std::log2(v) : v;
}

}  // namespace

void ParameterDef::validate() const {
  if (name.empty()) throw std::invalid_argument("parameter name is empty");
  if (values.empty()) throw std::invalid_argument("parameter '" + name + "' has no values");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) throw std::invalid_argument("parameter '" + name + "' has a non-finite value");
    if (k > 0 && !(values[k] > values[k - 1]))
      throw std::invalid_argument("parameter '" + name + "' values must be strictly increasing");
    if (scale == Scale::log2 && !(values[k] > 0.0))
      throw std::invalid_argument("parameter '" + name + "' uses log2 scale but has a non-positive value");
  }
}

double ParameterDef::normalized(std::size_t k) const {
  if (values.size() == 1) return 0.0;
  const double lo = transform(scale, values.front());
  const double hi = transform(scale, values.back());
  const double t = (transform(scale, values[k]) - lo) / (hi - lo);
  return std::clamp(t, 0.0, 1.0);
}

ParameterSpace::ParameterSpace(std::vector<ParameterDef> defs) : defs_(std::move(defs)) {
  strides_.assign(defs_.size(), 1);
  size_ = 1;
  for (std::size_t q = defs_.size(); q-- > 0;) {
    strides_[q] = size_;
    size_ *= defs_[q].values.size();
  }
  if (defs_.empty()) size_ = 0;
  coords_.resize(static_cast<Eigen::Index>(defs_.size()), static_cast<Eigen::Index>(size_));
  for (SetIndex j = 0; j < size_; ++j) {
    const auto idx = value_indices(j);
    for (std::size_t q = 0; q < defs_.size(); ++q)
      coords_(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) = defs_[q].normalized(idx[q]);
  }
}

std::vector<std::size_t> ParameterSpace::value_indices(SetIndex j) const {
  if (j >= size_) throw std::out_of_range("set index out of range");
  std::vector<std::size_t> idx(defs_.size());
  for (std::size_t q = 0; q < defs_.size(); ++q) {
    idx[q] = (j / strides_[q]) % defs_[q].values.size();
  }
  return idx;
}

SetIndex ParameterSpace::index_of_value_indices(std::span<const std::size_t> idx) const {
  if (idx.size() != defs_.size()) throw std::invalid_argument("value index vector has wrong length");
  SetIndex j = 0;
  for (std::size_t q = 0; q < defs_.size(); ++q) {
    if (idx[q] >= defs_[q].values.size()) throw std::out_of_range("value index out of range");
    j += idx[q] * strides_[q];
  }
  return j;
}

ParameterSet ParameterSpace::set_of(SetIndex j) const {
  const auto idx = value_indices(j);
  ParameterSet s;
  s.values.reserve(idx.size());
  for (std::size_t q = 0; q < idx.size(); ++q) s.values.push_back(defs_[q].values[idx[q]]);
  return s;
}

std::optional<SetIndex> ParameterSpace::find(const ParameterSet& set, double tol) const {
  if (set.values.size() != defs_.size()) return std::nullopt;
  std::vector<std::size_t> idx(defs_.size());
  for (std::size_t q = 0; q < defs_.size(); ++q) {
    const auto& vals = defs_[q].values;
    auto it = std::find_if(vals.begin(), vals.end(), [&](double v) {
      return std::abs(v - set.values[q]) <= tol * std::max(1.0, std::abs(v));
    });
    if (it == vals.end()) return std::nullopt;
    idx[q] = static_cast<std::size_t>(it - vals.begin());
  }
  return index_of_value_indices(idx);
}

SetIndex ParameterSpace::index_of(const ParameterSet& set) const {
  auto j = find(set);
  if (!j) throw std::invalid_argument("parameter set is not a member of the space");
  return *j;
}

double ParameterSpace::max_distance() const {
  return std::sqrt(static_cast<double>(defs_.size()));
}

std::vector<SetIndex> ParameterSpace::neighbors(SetIndex j) const {
  auto idx = value_indices(j);
  std::vector<SetIndex> out;
  for (std::size_t q = 0; q < defs_.size(); ++q) {
    const std::size_t k = idx[q];
    if (k > 0) {
      idx[q] = k - 1;
      out.push_back(index_of_value_indices(idx));
    }
    if (k + 1 < defs_[q].values.size()) {
      idx[q] = k + 1;
      out.push_back(index_of_value_indices(idx));
    }
    idx[q] = k;
  }
  std::sort(out.begin(), out.end());
  return out;
}

ParameterSpace enumerate_space(std::vector<ParameterDef> defs) {
  if (defs.empty()) throw std::invalid_argument("parameter space needs at least one parameter");
  std::set<std::string> names;
  for (const auto& d : defs) {
    d.validate();
    if (!names.insert(d.name).second) throw std::invalid_argument("duplicate parameter name '" + d.name + "'");
  }
  return ParameterSpace(std::move(defs));
}

double normalized_distance(const ParameterSpace& space, SetIndex a, SetIndex b) {
  return (space.normalized(a) - space.normalized(b)).norm();
}

double normalized_distance(const ParameterSpace& space, const ParameterSet& a, const ParameterSet& b) {
  return normalized_distance(space, space.index_of(a), space.index_of(b));
}

void ConstraintSpec::validate() const {
  if (metric.empty()) throw std::invalid_argument("constraint metric name is empty");
  if (!std::isfinite(bound)) throw std::invalid_argument("constraint on '" + metric + "' has a non-finite bound");
  if (!(percentile > 0.0 && percentile < 1.0))
    throw std::invalid_argument("constraint on '" + metric + "' needs a percentile in (0, 1)");
}

void Requirement::validate() const {
  if (goal.name.empty()) throw std::invalid_argument("goal metric name is empty");
  for (const auto& c : constraints) c.validate();
  if (confidence_target && !(*confidence_target >= 0.0 && *confidence_target <= 1.0))
    throw std::invalid_argument("confidence target must lie in [0, 1]");
}

bool Requirement::is_canonical() const {
  if (goal.direction != Direction::minimize) return false;
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const ConstraintSpec& c) { return c.relation == Relation::less_equal; });
}

std::vector<std::string> Requirement::metric_names() const {
  std::vector<std::string> names{goal.name};
  for (const auto& c : constraints) {
    if (std::find(names.begin(), names.end(), c.metric) == names.end()) names.push_back(c.metric);
  }
  return names;
}

Requirement canonicalize(const Requirement& req) {
  Requirement out = req;
  if (out.goal.direction == Direction::maximize) {
    out.goal.direction = Direction::minimize;
    out.goal.sign = -out.goal.sign;
  }
  for (auto& c : out.constraints) {
    if (c.relation == Relation::greater_equal) {
      c.relation = Relation::less_equal;
      c.bound = -c.bound;
      c.sign = -c.sign;
    }
  }
  return out;
}

double Observation::metric(const std::string& name) const {
  auto it = metrics.find(name);
  if (it == metrics.end())
    throw std::out_of_range("trial " + std::to_string(trial_index) + " has no metric '" + name + "'");
  return it->second;
}

void History::append(Observation obs) {
  if (obs.trial_index != static_cast<int>(observations_.size()) + 1)
    throw std::invalid_argument("trial indices must be consecutive starting at 1");
  if (obs.set_index >= by_set_.size()) throw std::out_of_range("observation set index out of range");
  by_set_[obs.set_index].push_back(observations_.size());
  observations_.push_back(std::move(obs));
}

std::vector<SetIndex> History::observed_sets() const {
  std::vector<SetIndex> out;
  for (SetIndex j = 0; j < by_set_.size(); ++j)
    if (!by_set_[j].empty()) out.push_back(j);
  return out;
}

std::vector<double> History::values(SetIndex set, const std::string& metric) const {
  std::vector<double> out;
  for (std::size_t row : by_set_.at(set)) out.push_back(observations_[row].metric(metric));
  return out;
}

History History::prefix(std::size_t n) const {
  History h(by_set_.size());
  for (std::size_t i = 0; i < std::min(n, observations_.size()); ++i) h.append(observations_[i]);
  return h;
}

void TerminationCriteria::validate() const {
  if (!any()) throw std::invalid_argument("at least one termination criterion is required");
  if (max_trials && *max_trials < 1) throw std::invalid_argument("max_trials must be positive");
  if (alpha_target && !std::isfinite(*alpha_target)) throw std::invalid_argument("alpha_target must be finite");
  if (beta_target && !std::isfinite(*beta_target)) throw std::invalid_argument("beta_target must be finite");
}

bool TerminationCriteria::unsatisfiable() const {
  if (max_trials) return false;
  const bool alpha_ok = alpha_target && *alpha_target >= 0.0 && *alpha_target <= 100.0;
  const bool beta_ok = beta_target && *beta_target >= 0.0 && *beta_target <= 1.0;
  return !alpha_ok && !beta_ok;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace apex
