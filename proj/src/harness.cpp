#include "apex/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace apex {

namespace {

bool dataset_satisfies(const TraceDataset& data, SetIndex set, const Requirement& canonical) {
  for (const auto& c : canonical.constraints) {
    const double m = dataset_median(data, set, c.metric);
    if (std::isnan(m) || !(c.canonical(m) <= c.bound)) return false;
  }
  return true;
}

}  // namespace

std::vector<SetIndex> ground_truth_satisfying(const TraceDataset& data, const Requirement& requirement) {
  const Requirement req = canonicalize(requirement);
  std::vector<SetIndex> out;
  for (SetIndex j = 0; j < data.space().size(); ++j)
    if (data.recorded(j) && dataset_satisfies(data, j, req)) out.push_back(j);
  return out;
}

std::optional<SetIndex> ground_truth_optimal(const TraceDataset& data, const Requirement& requirement) {
  const Requirement req = canonicalize(requirement);
  std::optional<SetIndex> best;
  double best_v = std::numeric_limits<double>::infinity();
  for (SetIndex j : ground_truth_satisfying(data, req)) {
    const double m = dataset_median(data, j, req.goal.name);
    if (std::isnan(m)) continue;
    const double v = req.canonical_goal(m);
    if (!best || v < best_v) {
      best = j;
      best_v = v;
    }
  }
  return best;
}

void CampaignSpec::validate() const {
  if (!dataset) throw std::invalid_argument("campaign needs a dataset");
  if (iterations < 1) throw std::invalid_argument("campaign iterations must be >= 1");
  if (max_trials < 1) throw std::invalid_argument("campaign max_trials must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (heatmap_bins < 1) throw std::invalid_argument("heatmap_bins must be >= 1");
  if (engine.space.size() != dataset->space().size()) throw std::invalid_argument("campaign space differs from dataset");
  EngineConfig e = engine;
  e.termination = TerminationCriteria{};
  e.termination.max_trials = max_trials;
  e.validate();
}

EmMetrics em_metrics(const std::vector<double>& optimality, std::size_t space_size) {
  EmMetrics em;
  for (std::size_t k = 0; k < optimality.size(); ++k)
    if (optimality[k] >= 99.0) {
      em.em1 = static_cast<int>(k + 1);
      break;
    }
  if (space_size >= 1 && space_size <= optimality.size()) em.em2 = optimality[space_size - 1];
  if (space_size >= 1 && 2 * space_size <= optimality.size()) em.em3 = optimality[2 * space_size - 1];
  return em;
}

double rmsd(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("rmsd: length mismatch");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

IterationLog run_iteration(const CampaignSpec& spec, int iteration, const std::vector<SetIndex>& satisfying_truth) {
  IterationLog log;
  log.seed = spec.base_seed + static_cast<std::uint64_t>(iteration);
  EngineConfig cfg = spec.engine;
  cfg.selector = spec.approach;
  cfg.seed = log.seed;
  cfg.termination = TerminationCriteria{};
  cfg.termination.max_trials = spec.max_trials;
  ReplayExecutor executor(*spec.dataset, derive_seed(log.seed, "replay"));
  const RunResult r = run(cfg, executor);
  if (r.status == RunStatus::aborted) {
    log.failed = true;
    log.error = r.error;
    return log;
  }
  std::vector<bool> good(cfg.space.size(), false);
  for (SetIndex j : satisfying_truth) good[j] = true;
  bool found = false;
  for (const auto& t : r.trials) {
    found = found || good[t.selected];
    log.reported.push_back(t.reported);
    log.reported_median.push_back(t.reported_median);
    log.alpha.push_back(t.alpha);
    log.alpha_b1.push_back(t.alpha_b1);
    log.alpha_b2.push_back(t.alpha_b2);
    log.found_satisfying.push_back(found);
  }
  return log;
}

namespace {

// Value at trial k (0-based), holding the last entry after an early stop.
template <typename T>
T at_or_last(const std::vector<T>& v, std::size_t k) {
  return v[std::min(k, v.size() - 1)];
}

std::size_t ok_count(const std::vector<IterationLog>& logs) {
  return static_cast<std::size_t>(std::count_if(logs.begin(), logs.end(), [](const auto& l) {
    return !l.failed && !l.reported.empty();
  }));
}

std::vector<double> mean_curve(const std::vector<IterationLog>& logs, int budget,
                               std::vector<double> IterationLog::*field) {
  std::vector<double> out(static_cast<std::size_t>(budget), 0.0);
  const std::size_t m = ok_count(logs);
  if (m == 0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (const auto& l : logs)
      if (!l.failed && !l.reported.empty()) s += at_or_last(l.*field, k);
    out[k] = s / static_cast<double>(m);
  }
  return out;
}

// First trial from which the reported best stays on `truth`.
std::optional<int> settle_trial(const IterationLog& l, SetIndex truth, int budget) {
  std::optional<int> start;
  for (int k = 0; k < budget; ++k) {
    const auto r = at_or_last(l.reported, static_cast<std::size_t>(k));
    if (r && *r == truth) {
      if (!start) start = k + 1;
    } else {
      start.reset();
    }
  }
  return start;
}

std::optional<int> first_reaching(const std::vector<double>& v, double threshold, int budget) {
  for (int k = 0; k < budget; ++k)
    if (at_or_last(v, static_cast<std::size_t>(k)) >= threshold) return k + 1;
  return std::nullopt;
}

}  // namespace

std::vector<double> optimality_curve(const std::vector<IterationLog>& logs, std::optional<SetIndex> truth,
                                     int budget) {
  std::vector<double> out(static_cast<std::size_t>(budget), 0.0);
  const std::size_t m = ok_count(logs);
  if (m == 0 || !truth) return out;
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::size_t hits = 0;
    for (const auto& l : logs) {
      if (l.failed || l.reported.empty()) continue;
      const auto r = at_or_last(l.reported, k);
      if (r && *r == *truth) ++hits;
    }
    out[k] = static_cast<double>(hits) * 100.0 / static_cast<double>(m);
  }
  return out;
}

std::vector<double> discovery_curve(const std::vector<IterationLog>& logs, int budget) {
  std::vector<double> out(static_cast<std::size_t>(budget), 0.0);
  const std::size_t m = ok_count(logs);
  if (m == 0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::size_t hits = 0;
    for (const auto& l : logs)
      if (!l.failed && !l.reported.empty() && at_or_last(l.found_satisfying, k)) ++hits;
    out[k] = static_cast<double>(hits) * 100.0 / static_cast<double>(m);
  }
  return out;
}

void aggregate(CampaignResult& result, const CampaignSpec& spec) {
  const int budget = spec.max_trials;
  const auto& logs = result.iterations;
  result.budget = budget;
  result.failed = static_cast<std::size_t>(std::count_if(logs.begin(), logs.end(), [](const auto& l) {
    return l.failed || l.reported.empty();
  }));
  result.optimality = optimality_curve(logs, result.ground_truth, budget);
  result.mean_alpha = mean_curve(logs, budget, &IterationLog::alpha);
  result.mean_alpha_b1 = mean_curve(logs, budget, &IterationLog::alpha_b1);
  result.mean_alpha_b2 = mean_curve(logs, budget, &IterationLog::alpha_b2);
  result.em = em_metrics(result.optimality, result.space_size);
  result.rmsd_alpha = rmsd(result.mean_alpha, result.optimality);
  result.rmsd_alpha_b1 = rmsd(result.mean_alpha_b1, result.optimality);
  result.rmsd_alpha_b2 = rmsd(result.mean_alpha_b2, result.optimality);
  result.discovery = discovery_curve(logs, budget);
  result.discovery_crossing = first_reaching(result.discovery, 99.0, budget);

  // Heatmap over the dataset's raw goal range.
  const std::string& goal = spec.engine.requirement.goal.name;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const auto& data = *spec.dataset;
  for (SetIndex j = 0; j < data.space().size(); ++j)
    for (const auto& r : data.records(j)) {
      auto it = r.metrics.find(goal);
      if (it == r.metrics.end()) continue;
      lo = std::min(lo, it->second);
      hi = std::max(hi, it->second);
    }
  const auto bins = static_cast<std::size_t>(spec.heatmap_bins);
  result.heatmap_edges.clear();
  result.heatmap.assign(static_cast<std::size_t>(budget), std::vector<std::size_t>(bins, 0));
  if (lo <= hi) {
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    for (std::size_t b = 0; b <= bins; ++b) result.heatmap_edges.push_back(lo + width * static_cast<double>(b));
    for (std::size_t k = 0; k < result.heatmap.size(); ++k)
      for (const auto& l : logs) {
        if (l.failed || l.reported.empty()) continue;
        const auto v = at_or_last(l.reported_median, k);
        if (!v) continue;
        const double pos = std::floor((*v - lo) / width);
        const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
        ++result.heatmap[k][b];
      }
  }

  result.timing.clear();
  if (result.ground_truth) {
    const std::pair<const char*, std::vector<double> IterationLog::*> metrics[] = {
        {"alpha", &IterationLog::alpha}, {"alpha_b1", &IterationLog::alpha_b1}, {"alpha_b2", &IterationLog::alpha_b2}};
    for (const auto& [name, field] : metrics)
      for (double t : spec.alpha_thresholds) {
        TerminationTiming tt;
        tt.metric = name;
        tt.threshold = t;
        double s = 0.0;
        double a = 0.0;
        for (const auto& l : logs) {
          if (l.failed || l.reported.empty()) continue;
          const auto stop = first_reaching(l.*field, t, budget);
          const auto settle = settle_trial(l, *result.ground_truth, budget);
          if (!stop || !settle) continue;
          const double d = *stop - *settle;
          s += d;
          a += std::abs(d);
          ++tt.count;
        }
        if (tt.count > 0) {
          tt.mean_signed = s / static_cast<double>(tt.count);
          tt.mean_absolute = a / static_cast<double>(tt.count);
        }
        result.timing.push_back(tt);
      }
  }
}

CampaignResult run_campaign(const CampaignSpec& spec) {
  spec.validate();
  CampaignResult result;
  result.approach = to_string(spec.approach);
  result.space_size = spec.engine.space.size();
  result.ground_truth = ground_truth_optimal(*spec.dataset, spec.engine.requirement);
  result.satisfying_truth = ground_truth_satisfying(*spec.dataset, spec.engine.requirement);
  result.iterations.resize(static_cast<std::size_t>(spec.iterations));

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= spec.iterations) return;
      try {
        result.iterations[static_cast<std::size_t>(i)] = run_iteration(spec, i, result.satisfying_truth);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = spec.iterations;
      }
    }
  };
  const int threads = std::min(spec.jobs, spec.iterations);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  aggregate(result, spec);
  return result;
}

// ---------------------------------------------------------------------------

PlantedProblem planted_problem() {
  PlantedProblem p;
  ParameterDef power{"tx_power", {-5.0, -3.0, -1.0, 0.0}, "dBm", Scale::linear};
  ParameterDef ntx{"n_tx", {1.0, 2.0, 3.0, 4.0}, "", Scale::linear};
  p.space = enumerate_space({power, ntx});
  p.requirement.goal = {"energy", Direction::minimize, "J", 1.0};
  ConstraintSpec prr;
  prr.metric = "prr";
  prr.relation = Relation::greater_equal;
  prr.bound = 65.0;
  prr.percentile = 0.5;
  p.requirement.constraints.push_back(prr);

  // Energy is a bowl whose minimum sits just inside the unreliable low-power
  // half, so the constrained optimum lies on the constraint boundary.
  const std::size_t oi = 2;
  const std::size_t oj = 1;
  const double ci = 1.3;
  const double cj = 1.0;
  for (SetIndex s = 0; s < p.space.size(); ++s) {
    const auto idx = p.space.value_indices(s);
    const auto i = static_cast<double>(idx[0]);
    const auto j = static_cast<double>(idx[1]);
    const double f = (i - ci) * (i - ci) + (j - cj) * (j - cj);
    p.energy.push_back(20.0 + 40.0 * f);
    p.prr.push_back(40.0 + 15.0 * i + 2.0 * j);
  }
  const auto [lo, hi] = std::minmax_element(p.energy.begin(), p.energy.end());
  p.energy_noise = 0.1 * (*hi - *lo);
  p.prr_noise = 2.0;
  p.optimum = p.space.index_of_value_indices(std::vector<std::size_t>{oi, oj});
  return p;
}

TraceDataset generate_planted_dataset(const PlantedProblem& problem, std::uint64_t seed, int records_per_set) {
  if (records_per_set < 1) throw std::invalid_argument("records_per_set must be >= 1");
  TraceDataset data(problem.space);
  data.set_metric_unit("energy", "J");
  data.set_metric_unit("prr", "%");
  Rng rng(seed);
  int run = 0;
  for (SetIndex s = 0; s < problem.space.size(); ++s)
    for (int r = 0; r < records_per_set; ++r) {
      TraceRecord rec;
      rec.metrics["energy"] = problem.energy[s] + problem.energy_noise * standard_normal(rng);
      rec.metrics["prr"] = std::clamp(problem.prr[s] + problem.prr_noise * standard_normal(rng), 0.0, 100.0);
      rec.run_id = "run-" + std::to_string(++run);
      data.add(s, std::move(rec));
    }
  return data;
}

}  // namespace apex
