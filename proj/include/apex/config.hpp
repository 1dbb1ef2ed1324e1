#pragma once

// YAML run configuration: protocol, requirement, executor, engine,
// termination, campaign and output blocks.

#include "apex/engine.hpp"
#include "apex/executor.hpp"
#include "apex/harness.hpp"
#include "apex/remote.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace apex {

/// Schema violation; the message starts with the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& reason)
      : std::invalid_argument(path.empty() ? reason : path + ": " + reason), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ExecutorKind { replay, synthetic, remote };
const char* to_string(ExecutorKind k);

struct ExecutorSpec {
  ExecutorKind kind = ExecutorKind::replay;
  std::string dataset;                // replay; resolved against the config file's directory
  std::optional<std::uint64_t> seed;  // replay draw order; derived from the engine seed when absent
  SyntheticSpec synthetic;
  RemoteConfig remote;
};

struct CampaignSettings {
  int iterations = 1000;
  int max_trials = 96;
  std::optional<std::uint64_t> base_seed;  // engine seed when absent
  int jobs = 1;
  int heatmap_bins = 20;
  std::vector<double> alpha_thresholds{80.0, 90.0, 99.0};
};

struct OutputSpec {
  std::string directory = ".";
  std::string run_json = "result.json";
  std::string trials_csv = "trials.csv";
  std::string campaign_json = "campaign.json";
  std::string campaign_csv = "campaign.csv";
};

struct Config {
  std::string source;  // file path, or empty for in-memory text
  std::string protocol;
  std::map<std::string, std::string> metric_units;
  EngineConfig engine;  // termination may be empty; commands check it
  ExecutorSpec executor;
  CampaignSettings campaign;
  OutputSpec output;
};

/// Reads and validates a config file. Relative paths resolve against the
/// file's directory. Throws ConfigError.
Config parse_config(const std::string& path);

/// Same as parse_config for in-memory YAML; relative paths resolve against `base_dir`.
Config parse_config_text(const std::string& text, const std::string& base_dir = ".");

/// Builds the executor named by the config. Replay loads the dataset.
std::unique_ptr<Executor> make_executor(const Config& config, std::shared_ptr<const TraceDataset>* dataset = nullptr);

/// Loads the replay dataset against the configured space.
std::shared_ptr<const TraceDataset> load_dataset(const Config& config);

/// Campaign description for `approach` over `dataset`.
CampaignSpec make_campaign(const Config& config, const TraceDataset& dataset, SelectorKind approach);

}  // namespace apex
