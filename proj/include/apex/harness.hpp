#pragma once

// Repeated optimization campaigns over a recorded dataset and the
// statistics derived from them.

#include "apex/engine.hpp"
#include "apex/executor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace apex {

/// Lowest median canonical goal among sets whose constraint medians satisfy
/// the requirement, over all records; lowest index on ties.
std::optional<SetIndex> ground_truth_optimal(const TraceDataset& data, const Requirement& requirement);

/// Sets whose constraint medians over all records satisfy the requirement.
std::vector<SetIndex> ground_truth_satisfying(const TraceDataset& data, const Requirement& requirement);

struct CampaignSpec {
  const TraceDataset* dataset = nullptr;
  /// Space, requirement, n_init, init strategy, analysis and RL settings.
  /// Selector, seed and termination are set per iteration.
  EngineConfig engine;
  SelectorKind approach = SelectorKind::apex_lcb;
  int iterations = 1000;
  int max_trials = 96;
  std::uint64_t base_seed = 1;
  int jobs = 1;
  int heatmap_bins = 20;
  std::vector<double> alpha_thresholds{80.0, 90.0, 99.0};

  void validate() const;
};

/// What one iteration contributes to the campaign statistics.
struct IterationLog {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<std::optional<SetIndex>> reported;  // per trial
  std::vector<std::optional<double>> reported_median;
  std::vector<double> alpha;
  std::vector<double> alpha_b1;
  std::vector<double> alpha_b2;
  std::vector<bool> found_satisfying;
};

struct EmMetrics {
  std::optional<int> em1;  // nullopt: 99 % not reached within the budget
  std::optional<double> em2;
  std::optional<double> em3;
};

/// EM1 = first n with optimality >= 99; EM2/EM3 = optimality at N_p and 2 N_p.
/// `optimality[k]` belongs to trial k + 1.
EmMetrics em_metrics(const std::vector<double>& optimality, std::size_t space_size);

/// sqrt(mean_k (a_k - b_k)^2).
double rmsd(const std::vector<double>& a, const std::vector<double>& b);

/// Trial-count gap between an alpha curve first reaching a threshold and the
/// reported best settling on the optimum for good.
struct TerminationTiming {
  std::string metric;  // alpha, alpha_b1 or alpha_b2
  double threshold = 0.0;
  std::size_t count = 0;  // iterations where both events happen
  double mean_signed = 0.0;
  double mean_absolute = 0.0;
};

struct CampaignResult {
  std::string approach;
  int budget = 0;
  std::size_t space_size = 0;
  std::optional<SetIndex> ground_truth;
  std::vector<SetIndex> satisfying_truth;
  std::vector<IterationLog> iterations;
  std::size_t failed = 0;

  std::vector<double> optimality;
  std::vector<double> mean_alpha;
  std::vector<double> mean_alpha_b1;
  std::vector<double> mean_alpha_b2;
  EmMetrics em;
  double rmsd_alpha = 0.0;
  double rmsd_alpha_b1 = 0.0;
  double rmsd_alpha_b2 = 0.0;
  std::vector<double> discovery;  // percent of iterations that tested a satisfying set
  std::optional<int> discovery_crossing;
  std::vector<double> heatmap_edges;               // heatmap_bins + 1 edges in raw goal units
  std::vector<std::vector<std::size_t>> heatmap;  // [trial][bin]
  std::vector<TerminationTiming> timing;
};

/// Runs one iteration; exposed for tests.
IterationLog run_iteration(const CampaignSpec& spec, int iteration, const std::vector<SetIndex>& satisfying_truth);

/// Iteration i uses seed base_seed + i. Iterations may run on `jobs` threads;
/// the result does not depend on the thread count.
CampaignResult run_campaign(const CampaignSpec& spec);

/// Recomputes every curve and summary from `result.iterations`.
void aggregate(CampaignResult& result, const CampaignSpec& spec);

/// Percent of iterations whose reported best equals `truth` at each trial.
std::vector<double> optimality_curve(const std::vector<IterationLog>& logs, std::optional<SetIndex> truth,
                                     int budget);

/// Percent of iterations that have tested a satisfying set by each trial,
/// and the first trial reaching 99 %.
std::vector<double> discovery_curve(const std::vector<IterationLog>& logs, int budget);

/// Crystal-like 4 x 4 space (tx_power, n_tx) with goal "energy" (minimize)
/// and constraint "prr" >= 65 at the median. Half the sets violate the
/// constraint; the constrained optimum is planted at tx_power -1, n_tx 2.
struct PlantedProblem {
  ParameterSpace space;
  Requirement requirement;
  std::vector<double> energy;  // noise-free per set
  std::vector<double> prr;
  double energy_noise = 0.0;
  double prr_noise = 0.0;
  SetIndex optimum = 0;
};

PlantedProblem planted_problem();

/// `records_per_set` noisy records per set drawn from the planted landscape.
TraceDataset generate_planted_dataset(const PlantedProblem& problem, std::uint64_t seed, int records_per_set = 6);

}  // namespace apex
