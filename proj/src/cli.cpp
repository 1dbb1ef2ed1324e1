#include "apex/cli.hpp"

#include "apex/config.hpp"
#include "apex/engine.hpp"
#include "apex/harness.hpp"
#include "apex/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace apex {

namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_trials;
  std::vector<std::string> approaches;
  std::optional<int> iterations;
  std::optional<int> jobs;
  std::optional<std::string> out;
};

std::string describe(const ParameterSpace& space, SetIndex j) {
  std::ostringstream s;
  const auto set = space.set_of(j);
  for (std::size_t q = 0; q < space.dimensions(); ++q) {
    if (q) s << " ";
    s << space.defs()[q].name << "=" << format_double(set.values[q]);
  }
  s << " (set " << j << ")";
  return s.str();
}

std::string output_path(const Config& cfg, const Overrides& o, const std::string& file) {
  const fs::path dir = o.out ? fs::path(*o.out) : fs::path(cfg.output.directory);
  return (dir / file).string();
}

std::string with_suffix(const std::string& file, const std::string& suffix) {
  const fs::path p(file);
  return (p.parent_path() / (p.stem().string() + "-" + suffix + p.extension().string())).string();
}

int cmd_optimize(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  Config cfg = parse_config(config_path);
  if (o.seed) cfg.engine.seed = *o.seed;
  if (o.max_trials) {
    if (*o.max_trials < 1) throw ConfigError("--max-trials", "must be positive");
    cfg.engine.termination.max_trials = *o.max_trials;
  }
  if (o.approaches.size() > 1) throw ConfigError("--approach", "optimize takes a single approach");
  if (!o.approaches.empty()) cfg.engine.selector = selector_from_string(o.approaches.front());
  if (!cfg.engine.termination.any())
    throw ConfigError("termination", "optimize needs max_trials, alpha_target or beta_target");
  if (cfg.engine.termination.unsatisfiable()) {
    err << "error: no termination criterion can be reached (targets out of range and no max_trials)\n";
    return kExitUnsatisfiable;
  }

  auto executor = make_executor(cfg);
  const RunResult result = run(cfg.engine, *executor);

  const std::string json_path = output_path(cfg, o, cfg.output.run_json);
  const std::string csv_path = output_path(cfg, o, cfg.output.trials_csv);
  std::ostringstream csv;
  write_trials_csv(csv, cfg.engine.space, result);
  write_file_atomic(json_path, run_result_json(cfg.engine, result));
  write_file_atomic(csv_path, csv.str());

  out << "selector: " << to_string(cfg.engine.selector) << "\n";
  out << "trials: " << result.history.size() << "\n";
  out << "status: " << to_string(result.status) << "\n";
  out << "best: " << (result.best ? describe(cfg.engine.space, *result.best) : "none") << "\n";
  out << "alpha: " << format_double(result.alpha) << "\n";
  out << "beta: " << format_double(result.beta) << "\n";
  out << "wrote " << json_path << " and " << csv_path << "\n";
  if (result.status == RunStatus::aborted) {
    err << "error: executor failed: " << result.error << "\n";
    return kExitExecutor;
  }
  return kExitOk;
}

int cmd_campaign(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream&) {
  Config cfg = parse_config(config_path);
  if (o.seed) cfg.campaign.base_seed = *o.seed;
  if (o.max_trials) cfg.campaign.max_trials = *o.max_trials;
  if (o.iterations) cfg.campaign.iterations = *o.iterations;
  if (o.jobs) cfg.campaign.jobs = *o.jobs;

  std::vector<SelectorKind> approaches;
  for (const auto& a : o.approaches) {
    try {
      approaches.push_back(selector_from_string(a));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--approach", e.what());
    }
  }
  if (approaches.empty()) approaches.push_back(cfg.engine.selector);

  const auto dataset = load_dataset(cfg);
  // Validate every approach before running any of them.
  std::vector<CampaignSpec> specs;
  for (SelectorKind k : approaches) specs.push_back(make_campaign(cfg, *dataset, k));

  for (const auto& spec : specs) {
    const CampaignResult result = run_campaign(spec);
    const std::string name = to_string(spec.approach);
    const std::string json_path = output_path(cfg, o, with_suffix(cfg.output.campaign_json, name));
    const std::string csv_path = output_path(cfg, o, with_suffix(cfg.output.campaign_csv, name));
    std::ostringstream csv;
    write_campaign_csv(csv, result);
    write_file_atomic(json_path, campaign_json(spec, result));
    write_file_atomic(csv_path, csv.str());

    out << name << ": iterations " << result.iterations.size() << ", failed " << result.failed << ", EM1 "
        << (result.em.em1 ? std::to_string(*result.em.em1) : "not reached") << ", EM2 "
        << (result.em.em2 ? format_double(*result.em.em2) : "-") << ", EM3 "
        << (result.em.em3 ? format_double(*result.em.em3) : "-") << ", RMSD(alpha) " << format_double(result.rmsd_alpha)
        << "\n";
    out << "  ground truth: " << (result.ground_truth ? describe(spec.engine.space, *result.ground_truth) : "none")
        << "\n";
    out << "  wrote " << json_path << " and " << csv_path << "\n";
  }
  return kExitOk;
}

int cmd_validate_config(const std::string& config_path, std::ostream& out) {
  const Config cfg = parse_config(config_path);
  out << config_path << ": ok (" << cfg.engine.space.size() << " parameter sets, executor "
      << to_string(cfg.executor.kind) << ")\n";
  return kExitOk;
}

int cmd_validate_dataset(const std::string& path, const std::optional<std::string>& config_path, std::size_t target,
                         std::ostream& out) {
  std::optional<ParameterSpace> space;
  std::vector<std::string> required;
  if (config_path) {
    const Config cfg = parse_config(*config_path);
    space = cfg.engine.space;
    required = cfg.engine.requirement.metric_names();
  }
  if (!fs::exists(path)) throw ConfigError(path, "dataset file not found");
  std::vector<DatasetIssue> issues;
  TraceDataset data;
  try {
    data = TraceDataset::load(path, space, &issues);
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
  const DatasetReport report = validate_dataset(data, required, target, std::move(issues));
  print_dataset_report(out, data, report);
  return report.clean() ? kExitOk : kExitConfig;
}

int cmd_generate_dataset(const std::string& path, std::uint64_t seed, int records, std::ostream& out) {
  if (records < 1) throw ConfigError("--records", "must be >= 1");
  const PlantedProblem problem = planted_problem();
  const TraceDataset data = generate_planted_dataset(problem, seed, records);
  std::ostringstream s;
  data.write_jsonl(s);
  write_file_atomic(path, s.str());
  out << "wrote " << data.total_records() << " records over " << data.space().size() << " sets to " << path << "\n";
  return kExitOk;
}

}  // namespace

DatasetReport validate_dataset(const TraceDataset& data, const std::vector<std::string>& required_metrics,
                               std::size_t target_records, std::vector<DatasetIssue> parse_issues) {
  DatasetReport r;
  r.issues = std::move(parse_issues);
  r.space_size = data.space().size();
  r.total_records = data.total_records();
  r.target_records = target_records;
  const std::vector<std::string> required = required_metrics.empty() ? data.metric_names() : required_metrics;

  std::map<std::string, int> first_seen;
  std::vector<DatasetIssue> found;
  for (SetIndex j = 0; j < data.space().size(); ++j) {
    const auto& recs = data.records(j);
    if (!recs.empty()) ++r.covered;
    if (recs.size() < target_records) r.shortfalls.emplace_back(j, recs.size());
    for (const auto& rec : recs) {
      for (const auto& m : required)
        if (!rec.metrics.count(m)) found.push_back({rec.line, "record lacks metric '" + m + "'"});
      if (rec.run_id.empty()) continue;
      auto [it, inserted] = first_seen.emplace(rec.run_id, rec.line);
      if (!inserted)
        found.push_back({rec.line, "duplicate run_id '" + rec.run_id + "' (first on line " +
                                       std::to_string(it->second) + ")"});
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const DatasetIssue& a, const DatasetIssue& b) { return a.line < b.line; });
  r.issues.insert(r.issues.end(), found.begin(), found.end());
  return r;
}

void print_dataset_report(std::ostream& out, const TraceDataset& data, const DatasetReport& r) {
  out << r.total_records << " records, ";
  if (r.covered == r.space_size)
    out << "full coverage";
  else
    out << r.covered << " of " << r.space_size << " sets covered";
  out << " (" << r.space_size << " parameter sets, target " << r.target_records << " records each)\n";
  for (const auto& [set, count] : r.shortfalls)
    out << "shortfall: " << describe(data.space(), set) << " has " << count << " of " << r.target_records
        << " records\n";
  for (const auto& issue : r.issues) out << "line " << issue.line << ": " << issue.message << "\n";
  if (r.clean()) out << "ok\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained Bayesian optimization of protocol parameters", "apex-opt"};
  app.require_subcommand(1);

  Overrides o;
  std::string config_path;
  std::uint64_t seed = 0;
  int max_trials = 0;
  int iterations = 0;
  int jobs = 0;
  std::string out_dir;

  auto* optimize = app.add_subcommand("optimize", "Run one optimization and write its result and trial log");
  optimize->add_option("config", config_path, "YAML config")->required();
  auto* campaign = app.add_subcommand("campaign", "Replay repeated optimizations over a recorded dataset");
  campaign->add_option("config", config_path, "YAML config")->required();
  for (auto* sub : {optimize, campaign}) {
    sub->add_option("--seed", seed, "Override the seed (campaign: base seed)");
    sub->add_option("--max-trials", max_trials, "Override the trial budget");
    sub->add_option("--approach", o.approaches, "Selector: apex-lcb, apex-ei, gel, ger, guc, rl-step, rl-any")
        ->delimiter(',');
    sub->add_option("--out", out_dir, "Output directory");
  }
  campaign->add_option("--iterations", iterations, "Number of replayed optimizations");
  campaign->add_option("--jobs", jobs, "Worker threads");

  auto* validate_cfg = app.add_subcommand("validate-config", "Check a config file");
  validate_cfg->add_option("config", config_path, "YAML config")->required();

  std::string dataset_path;
  std::string dataset_config;
  std::size_t target = 6;
  auto* validate_ds = app.add_subcommand("validate-dataset", "Report coverage and problems of a trace dataset");
  validate_ds->add_option("dataset", dataset_path, "JSON Lines or CSV dataset")->required();
  validate_ds->add_option("--config", dataset_config, "Config providing the space and required metrics");
  validate_ds->add_option("--records", target, "Target records per set");

  std::string gen_path;
  std::uint64_t gen_seed = 20240601;
  int gen_records = 6;
  auto* generate = app.add_subcommand("generate-dataset", "Write the planted 4x4 benchmark dataset");
  generate->add_option("--out", gen_path, "Output file")->required();
  generate->add_option("--seed", gen_seed, "Noise seed");
  generate->add_option("--records", gen_records, "Records per set");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    for (auto* sub : {optimize, campaign}) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) o.seed = seed;
      if (sub->count("--max-trials")) o.max_trials = max_trials;
      if (sub->count("--out")) o.out = out_dir;
    }
    if (campaign->count("--iterations")) o.iterations = iterations;
    if (campaign->count("--jobs")) o.jobs = jobs;

    if (optimize->parsed()) return cmd_optimize(config_path, o, out, err);
    if (campaign->parsed()) return cmd_campaign(config_path, o, out, err);
    if (validate_cfg->parsed()) return cmd_validate_config(config_path, out);
    if (validate_ds->parsed())
      return cmd_validate_dataset(dataset_path,
                                  dataset_config.empty() ? std::nullopt : std::optional<std::string>(dataset_config),
                                  target, out);
    if (generate->parsed()) return cmd_generate_dataset(gen_path, gen_seed, gen_records, out);
  } catch (const UnsatisfiableTermination& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnsatisfiable;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ExecutorError& e) {
    err << "executor error: " << e.what() << "\n";
    return kExitExecutor;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace apex
