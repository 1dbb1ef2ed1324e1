#pragma once

// Trial execution backends. An executor turns one parameter set into one
// metric record, or reports the set as exhausted.

#include "apex/domain.hpp"
#include "apex/random.hpp"

#include <istream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace apex {

/// Raised by an executor when the run cannot continue.
class ExecutorError : public std::runtime_error {
 public:
  explicit ExecutorError(const std::string& what, bool retryable = false)
      : std::runtime_error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class DatasetExhausted : public ExecutorError {
 public:
  DatasetExhausted() : ExecutorError("every record of the dataset has been consumed") {}
};

class Executor {
 public:
  virtual ~Executor() = default;

  /// Runs one trial. nullopt means `set` can no longer be tested and the
  /// caller should pick another one.
  virtual std::optional<Metrics> run_trial(SetIndex set, int trial_index) = 0;

  /// True when run_trial(set) would return nullopt.
  virtual bool exhausted(SetIndex) const { return false; }
};

// ---------------------------------------------------------------------------
// Recorded traces

struct TraceRecord {
  Metrics metrics;
  std::string run_id;
  int line = 0;  // 1-based source line, 0 when built in memory
};

struct DatasetIssue {
  int line = 0;
  std::string message;
};

/// Recorded trial results grouped by parameter set.
class TraceDataset {
 public:
  TraceDataset() = default;
  explicit TraceDataset(ParameterSpace space) : space_(std::move(space)), records_(space_.size()) {}

  const ParameterSpace& space() const { return space_; }
  const std::vector<TraceRecord>& records(SetIndex set) const { return records_.at(set); }
  std::size_t total_records() const;
  bool recorded(SetIndex set) const { return !records_.at(set).empty(); }
  /// Metric names seen in any record, sorted.
  std::vector<std::string> metric_names() const;
  /// Declared metric units from the header, if any.
  const std::map<std::string, std::string>& metric_units() const { return units_; }

  void add(SetIndex set, TraceRecord record);
  void set_metric_unit(const std::string& metric, std::string unit) { units_[metric] = std::move(unit); }

  /// JSON Lines: an optional first line {"header": {"parameters": [...],
  /// "metrics": [...]}}, then one {"params", "metrics", "run_id"} per line.
  /// Without a header the space is built from the distinct values seen.
  /// `space` overrides both. Lines that cannot be placed are collected in
  /// `issues` when given, otherwise they throw std::runtime_error.
  static TraceDataset read_jsonl(std::istream& in, const std::optional<ParameterSpace>& space = std::nullopt,
                                 std::vector<DatasetIssue>* issues = nullptr);
  /// CSV with columns param:<name>, metric:<name> and optionally run_id.
  static TraceDataset read_csv(std::istream& in, const std::optional<ParameterSpace>& space = std::nullopt,
                               std::vector<DatasetIssue>* issues = nullptr);
  /// Picks the reader from the file extension (.csv, otherwise JSON Lines).
  static TraceDataset load(const std::string& path, const std::optional<ParameterSpace>& space = std::nullopt,
                           std::vector<DatasetIssue>* issues = nullptr);

  void write_jsonl(std::ostream& out) const;

 private:
  ParameterSpace space_;
  std::vector<std::vector<TraceRecord>> records_;
  std::map<std::string, std::string> units_;
};

/// Median of `metric` over every record of `set`; NaN when the set has none.
double dataset_median(const TraceDataset& data, SetIndex set, const std::string& metric);

/// Samples recorded results without replacement.
class ReplayExecutor : public Executor {
 public:
  ReplayExecutor(const TraceDataset& data, std::uint64_t seed);

  std::optional<Metrics> run_trial(SetIndex set, int trial_index) override;
  bool exhausted(SetIndex set) const override;

  struct Consumption {
    SetIndex requested;
    SetIndex source;
    std::size_t record;
  };
  const std::vector<Consumption>& consumed() const { return consumed_; }

  /// Recorded set whose records stand in for an unrecorded `set`: nearest by
  /// normalized distance among sets with records left, lowest index on ties.
  std::optional<SetIndex> donor(SetIndex set) const;

 private:
  const TraceDataset* data_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> remaining_;
  std::size_t remaining_total_ = 0;
  std::vector<Consumption> consumed_;
};

// ---------------------------------------------------------------------------
// Synthetic landscapes

/// Noise-free metric surface over unit-cube coordinates.
struct Landscape {
  enum class Kind { quadratic, linear, table };
  Kind kind = Kind::quadratic;
  double offset = 0.0;
  double scale = 1.0;
  std::vector<double> center;   // quadratic: offset + scale * |u - center|^2
  std::vector<double> weights;  // linear: offset + weights . u
  std::vector<double> table;    // table: one value per set index
  double noise_std = 0.0;

  double value(const ParameterSpace& space, SetIndex set) const;
  void validate(const ParameterSpace& space) const;
};

struct SyntheticSpec {
  std::map<std::string, Landscape> metrics;
  std::uint64_t seed = 0;
};

/// Landscape value plus Gaussian noise drawn from (seed, trial, metric).
class SyntheticExecutor : public Executor {
 public:
  SyntheticExecutor(ParameterSpace space, SyntheticSpec spec);
  std::optional<Metrics> run_trial(SetIndex set, int trial_index) override;
  const SyntheticSpec& spec() const { return spec_; }

 private:
  ParameterSpace space_;
  SyntheticSpec spec_;
};

}  // namespace apex
