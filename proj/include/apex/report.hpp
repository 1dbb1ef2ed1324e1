#pragma once

// JSON and CSV artifacts for single runs and campaigns.

#include "apex/engine.hpp"
#include "apex/harness.hpp"

#include <iosfwd>
#include <string>

namespace apex {

inline constexpr int kSchemaVersion = 1;

/// Run summary with everything needed to reload and re-analyze it: space,
/// requirement, analysis settings, every observation and every trial row.
std::string run_result_json(const EngineConfig& config, const RunResult& result);

struct LoadedRun {
  EngineConfig config;  // space, requirement, analysis, selector and seed
  RunResult result;
};

/// Inverse of run_result_json. Throws std::runtime_error on a malformed or
/// unsupported document.
LoadedRun load_run_result(const std::string& json_text);

/// One row per trial. Columns: n, set, one column per parameter, initial,
/// trapped, escape, best, reported, reported_median, kappa, tau, cumulative,
/// angle_deg, alpha, alpha_b1, alpha_b2, beta, goal_range, then one
/// metric:<name> column per observed metric.
void write_trials_csv(std::ostream& out, const ParameterSpace& space, const RunResult& result);

/// Campaign summary. Contains no timing, so equal inputs give equal bytes.
std::string campaign_json(const CampaignSpec& spec, const CampaignResult& result);

/// One row per trial: n, optimality, mean_alpha, mean_alpha_b1,
/// mean_alpha_b2, discovery, then bin_0 .. bin_{k-1} heatmap counts.
void write_campaign_csv(std::ostream& out, const CampaignResult& result);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace apex
