#pragma once

// Command-line front end: optimize, campaign, validate-config,
// validate-dataset and generate-dataset.

#include "apex/executor.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace apex {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitExecutor = 3,
  kExitUnsatisfiable = 4,
};

struct DatasetReport {
  std::size_t total_records = 0;
  std::size_t space_size = 0;
  std::size_t covered = 0;  // sets with at least one record
  std::size_t target_records = 6;
  std::vector<std::pair<SetIndex, std::size_t>> shortfalls;  // (set, record count) below target
  std::vector<DatasetIssue> issues;                          // parse problems, missing metrics, duplicate run ids

  bool clean() const { return shortfalls.empty() && issues.empty() && covered == space_size; }
};

/// Checks coverage, per-set record counts against `target_records`, records
/// lacking any of `required_metrics` (every metric seen when empty) and
/// duplicate run ids. `parse_issues` are carried over.
DatasetReport validate_dataset(const TraceDataset& data, const std::vector<std::string>& required_metrics,
                               std::size_t target_records, std::vector<DatasetIssue> parse_issues = {});

void print_dataset_report(std::ostream& out, const TraceDataset& data, const DatasetReport& report);

/// Entry point behind the apex-opt binary; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apex
