#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apex {

using SetIndex = std::size_t;

/// How a parameter's values are placed on the unit interval.
enum class Scale { linear, log2 };

/// One tunable parameter and its admissible values (ascending, finite).
struct ParameterDef {
  std::string name;
  std::vector<double> values;
  std::string unit;
  Scale scale = Scale::linear;

  void validate() const;
  /// Position of value index `k` in [0, 1].
  double normalized(std::size_t k) const;
};

/// A concrete assignment of one value per parameter.
struct ParameterSet {
  std::vector<double> values;
  bool operator==(const ParameterSet&) const = default;
};

/// The finite space of all parameter combinations.
///
/// Sets are numbered 0..size()-1 in lexicographic order of their value
/// indices, the first parameter varying slowest. Normalized coordinates map
/// each dimension affinely (after the optional log2 transform) to [0, 1].
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterDef> defs);

  std::size_t size() const { return size_; }
  std::size_t dimensions() const { return defs_.size(); }
  const std::vector<ParameterDef>& defs() const { return defs_; }

  std::vector<std::size_t> value_indices(SetIndex j) const;
  SetIndex index_of_value_indices(std::span<const std::size_t> idx) const;
  ParameterSet set_of(SetIndex j) const;
  /// Throws std::invalid_argument when `set` is not a member of the space.
  SetIndex index_of(const ParameterSet& set) const;
  std::optional<SetIndex> find(const ParameterSet& set, double tol = 1e-9) const;

  /// Column j holds the unit-cube coordinates of set j (dimensions x size).
  const Eigen::MatrixXd& coordinates() const { return coords_; }
  Eigen::VectorXd normalized(SetIndex j) const { return coords_.col(static_cast<Eigen::Index>(j)); }

  /// Length of the unit-cube diagonal, sqrt(b).
  double max_distance() const;

  /// Sets that differ from j by one value step in exactly one parameter.
  std::vector<SetIndex> neighbors(SetIndex j) const;

 private:
  std::vector<ParameterDef> defs_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  Eigen::MatrixXd coords_;
};

/// Validates the definitions and builds the full enumeration.
ParameterSpace enumerate_space(std::vector<ParameterDef> defs);

double normalized_distance(const ParameterSpace& space, SetIndex a, SetIndex b);
double normalized_distance(const ParameterSpace& space, const ParameterSet& a, const ParameterSet& b);

enum class Direction { minimize, maximize };
enum class Relation { greater_equal, less_equal };

struct MetricSpec {
  std::string name;
  Direction direction = Direction::minimize;
  std::string unit;
  /// +1, or -1 once a maximization goal has been folded into minimization.
  double sign = 1.0;
};

struct ConstraintSpec {
  std::string metric;
  Relation relation = Relation::less_equal;
  double bound = 0.0;
  double percentile = 0.5;
  /// +1, or -1 once a ">=" constraint has been rewritten as "-metric <= -bound".
  double sign = 1.0;

  void validate() const;
  /// Value on the canonical (<=) scale.
  double canonical(double raw) const { return sign * raw; }
  /// Only meaningful in canonical form.
  bool satisfied_by(double raw) const { return canonical(raw) <= bound; }
};

struct Requirement {
  MetricSpec goal;
  std::vector<ConstraintSpec> constraints;
  std::optional<double> confidence_target;

  void validate() const;
  bool is_canonical() const;
  double canonical_goal(double raw) const { return goal.sign * raw; }
  /// Every metric name the requirement reads.
  std::vector<std::string> metric_names() const;
};

/// Internal minimization form: goal minimized, every constraint "<=".
/// Idempotent.
Requirement canonicalize(const Requirement& req);

using Metrics = std::map<std::string, double>;

struct Observation {
  int trial_index = 0;
  SetIndex set_index = 0;
  Metrics metrics;

  double metric(const std::string& name) const;
};

/// Ordered trial log with a per-set grouping cache.
class History {
 public:
  History() = default;
  explicit History(std::size_t space_size) : by_set_(space_size) {}

  /// Appends the next trial; trial indices must run 1, 2, 3, ...
  void append(Observation obs);

  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }
  std::size_t space_size() const { return by_set_.size(); }
  const std::vector<Observation>& observations() const { return observations_; }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  const Observation& back() const { return observations_.back(); }

  std::size_t count(SetIndex set) const { return by_set_.at(set).size(); }
  const std::vector<std::size_t>& rows_of(SetIndex set) const { return by_set_.at(set); }
  std::vector<SetIndex> observed_sets() const;
  std::vector<double> values(SetIndex set, const std::string& metric) const;

  /// History of the first `n` trials.
  History prefix(std::size_t n) const;

 private:
  std::vector<Observation> observations_;
  std::vector<std::vector<std::size_t>> by_set_;
};

struct TerminationCriteria {
  std::optional<int> max_trials;
  std::optional<double> alpha_target;
  std::optional<double> beta_target;

  bool any() const { return max_trials || alpha_target || beta_target; }
  /// Throws std::invalid_argument for malformed values.
  void validate() const;
  /// True when no configured criterion can ever fire.
  bool unsatisfiable() const;
};

double median(std::vector<double> values);

}  // namespace apex
