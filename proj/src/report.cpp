#include "apex/report.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>

namespace apex {

using nlohmann::ordered_json;

namespace {

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json params_json(const ParameterSpace& space, SetIndex j) {
  ordered_json p = ordered_json::object();
  const auto set = space.set_of(j);
  for (std::size_t q = 0; q < space.dimensions(); ++q) p[space.defs()[q].name] = set.values[q];
  return p;
}

ordered_json space_json(const ParameterSpace& space) {
  ordered_json params = ordered_json::array();
  for (const auto& d : space.defs())
    params.push_back({{"name", d.name},
                      {"values", d.values},
                      {"unit", d.unit},
                      {"scale", d.scale == Scale::log2 ? "log2" : "linear"}});
  return {{"parameters", params}};
}

ParameterSpace space_from(const ordered_json& j) {
  std::vector<ParameterDef> defs;
  for (const auto& p : j.at("parameters")) {
    ParameterDef d;
    d.name = p.at("name").get<std::string>();
    d.values = p.at("values").get<std::vector<double>>();
    d.unit = p.value("unit", "");
    d.scale = p.value("scale", "linear") == "log2" ? Scale::log2 : Scale::linear;
    defs.push_back(std::move(d));
  }
  return enumerate_space(std::move(defs));
}

ordered_json requirement_json(const Requirement& r) {
  ordered_json cs = ordered_json::array();
  for (const auto& c : r.constraints)
    cs.push_back({{"metric", c.metric},
                  {"relation", c.relation == Relation::greater_equal ? ">=" : "<="},
                  {"bound", c.bound},
                  {"percentile", c.percentile}});
  return {{"goal",
           {{"metric", r.goal.name},
            {"direction", r.goal.direction == Direction::maximize ? "maximize" : "minimize"},
            {"unit", r.goal.unit}}},
          {"constraints", cs},
          {"confidence", opt(r.confidence_target)}};
}

Requirement requirement_from(const ordered_json& j) {
  Requirement r;
  const auto& g = j.at("goal");
  r.goal.name = g.at("metric").get<std::string>();
  r.goal.direction = g.value("direction", "minimize") == "maximize" ? Direction::maximize : Direction::minimize;
  r.goal.unit = g.value("unit", "");
  for (const auto& c : j.at("constraints")) {
    ConstraintSpec s;
    s.metric = c.at("metric").get<std::string>();
    s.relation = c.at("relation").get<std::string>() == ">=" ? Relation::greater_equal : Relation::less_equal;
    s.bound = c.at("bound").get<double>();
    s.percentile = c.at("percentile").get<double>();
    r.constraints.push_back(s);
  }
  if (j.contains("confidence") && !j["confidence"].is_null()) r.confidence_target = j["confidence"].get<double>();
  return r;
}

ordered_json analysis_json(const AnalysisSettings& a) {
  const auto& k = a.kernel;
  return {{"delta", a.delta},
          {"eta", a.eta},
          {"kernel",
           {{"kind", k.kind == KernelKind::matern52 ? "matern52" : "rbf"},
            {"length_scale", k.length_scale},
            {"signal_variance", k.signal_variance},
            {"noise_variance", k.noise_variance},
            {"jitter", k.jitter}}}};
}

AnalysisSettings analysis_from(const ordered_json& j) {
  AnalysisSettings a;
  a.delta = j.at("delta").get<double>();
  a.eta = j.at("eta").get<double>();
  const auto& k = j.at("kernel");
  a.kernel.kind = k.at("kind").get<std::string>() == "matern52" ? KernelKind::matern52 : KernelKind::rbf;
  a.kernel.length_scale = k.at("length_scale").get<double>();
  a.kernel.signal_variance = k.at("signal_variance").get<double>();
  a.kernel.noise_variance = k.at("noise_variance").get<double>();
  a.kernel.jitter = k.at("jitter").get<double>();
  return a;
}

ordered_json trial_json(const TrialRecord& t) {
  return {{"n", t.n},
          {"selected", t.selected},
          {"initial", t.initial},
          {"trapped", t.trapped},
          {"escape", t.escape ? ordered_json(to_string(*t.escape)) : ordered_json(nullptr)},
          {"best", opt(t.best)},
          {"best_median", opt(t.best_median)},
          {"reported", opt(t.reported)},
          {"reported_median", opt(t.reported_median)},
          {"kappa", t.kappa},
          {"tau", opt(t.tau)},
          {"cumulative", t.cumulative},
          {"angle_deg", t.angle_deg},
          {"alpha", t.alpha},
          {"alpha_b1", t.alpha_b1},
          {"alpha_b2", t.alpha_b2},
          {"beta", t.beta},
          {"goal_range", t.goal_range}};
}

template <typename T>
std::optional<T> opt_from(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

TrialRecord trial_from(const ordered_json& j) {
  TrialRecord t;
  t.n = j.at("n").get<int>();
  t.selected = j.at("selected").get<SetIndex>();
  t.initial = j.at("initial").get<bool>();
  t.trapped = j.at("trapped").get<bool>();
  if (auto e = opt_from<std::string>(j, "escape"))
    t.escape = *e == "goal-outlier" ? EscapeMode::goal_outlier : EscapeMode::constraint_noise;
  t.best = opt_from<SetIndex>(j, "best");
  t.best_median = opt_from<double>(j, "best_median");
  t.reported = opt_from<SetIndex>(j, "reported");
  t.reported_median = opt_from<double>(j, "reported_median");
  t.kappa = j.at("kappa").get<double>();
  t.tau = opt_from<double>(j, "tau");
  t.cumulative = j.at("cumulative").get<double>();
  t.angle_deg = j.at("angle_deg").get<double>();
  t.alpha = j.at("alpha").get<double>();
  t.alpha_b1 = j.at("alpha_b1").get<double>();
  t.alpha_b2 = j.at("alpha_b2").get<double>();
  t.beta = j.at("beta").get<double>();
  t.goal_range = j.at("goal_range").get<double>();
  return t;
}

RunStatus status_from(const std::string& s) {
  for (RunStatus r : {RunStatus::max_trials, RunStatus::alpha_target, RunStatus::beta_target, RunStatus::aborted})
    if (s == to_string(r)) return r;
  throw std::runtime_error("unknown run status '" + s + "'");
}

std::string csv_opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string csv_opt(const std::optional<SetIndex>& v) { return v ? std::to_string(*v) : ""; }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string run_result_json(const EngineConfig& config, const RunResult& result) {
  ordered_json observations = ordered_json::array();
  for (const auto& o : result.history.observations())
    observations.push_back({{"trial", o.trial_index}, {"set", o.set_index}, {"metrics", o.metrics}});
  ordered_json trials = ordered_json::array();
  for (const auto& t : result.trials) trials.push_back(trial_json(t));

  ordered_json best = nullptr;
  if (result.best) best = {{"index", *result.best}, {"params", params_json(config.space, *result.best)}};

  ordered_json doc = {{"schema_version", kSchemaVersion},
                      {"kind", "run"},
                      {"selector", to_string(config.selector)},
                      {"seed", config.seed},
                      {"space", space_json(config.space)},
                      {"requirement", requirement_json(config.requirement)},
                      {"analysis", analysis_json(config.analysis)},
                      {"status", to_string(result.status)},
                      {"error", result.error},
                      {"trials_run", result.history.size()},
                      {"best", best},
                      {"alpha", result.alpha},
                      {"beta", result.beta},
                      {"observations", observations},
                      {"trials", trials}};
  return doc.dump(2) + "\n";
}

LoadedRun load_run_result(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("run result is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion)
      throw std::runtime_error("unsupported schema_version " + doc["schema_version"].dump());
    if (doc.at("kind").get<std::string>() != "run") throw std::runtime_error("document is not a run result");
    LoadedRun out;
    out.config.space = space_from(doc.at("space"));
    out.config.requirement = requirement_from(doc.at("requirement"));
    out.config.analysis = analysis_from(doc.at("analysis"));
    out.config.selector = selector_from_string(doc.at("selector").get<std::string>());
    out.config.seed = doc.at("seed").get<std::uint64_t>();

    RunResult& r = out.result;
    r.history = History(out.config.space.size());
    for (const auto& o : doc.at("observations")) {
      Observation obs;
      obs.trial_index = o.at("trial").get<int>();
      obs.set_index = o.at("set").get<SetIndex>();
      obs.metrics = o.at("metrics").get<Metrics>();
      if (obs.set_index >= out.config.space.size()) throw std::runtime_error("observation outside the space");
      r.history.append(std::move(obs));
    }
    for (const auto& t : doc.at("trials")) r.trials.push_back(trial_from(t));
    r.status = status_from(doc.at("status").get<std::string>());
    r.error = doc.value("error", "");
    if (!doc.at("best").is_null()) {
      r.best = doc["best"].at("index").get<SetIndex>();
      r.best_params = out.config.space.set_of(*r.best);
    }
    r.alpha = doc.at("alpha").get<double>();
    r.beta = doc.at("beta").get<double>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed run result: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed run result: ") + e.what());
  }
}

void write_trials_csv(std::ostream& out, const ParameterSpace& space, const RunResult& result) {
  std::set<std::string> metric_set;
  for (const auto& o : result.history.observations())
    for (const auto& [name, v] : o.metrics) metric_set.insert(name);
  const std::vector<std::string> metrics(metric_set.begin(), metric_set.end());

  out << "n,set";
  for (const auto& d : space.defs()) out << "," << d.name;
  out << ",initial,trapped,escape,best,reported,reported_median,kappa,tau,cumulative,angle_deg,alpha,alpha_b1,"
         "alpha_b2,beta,goal_range";
  for (const auto& m : metrics) out << ",metric:" << m;
  out << "\n";

  const auto& obs = result.history.observations();
  for (std::size_t k = 0; k < result.trials.size(); ++k) {
    const TrialRecord& t = result.trials[k];
    out << t.n << "," << t.selected;
    const auto set = space.set_of(t.selected);
    for (double v : set.values) out << "," << format_double(v);
    out << "," << (t.initial ? 1 : 0) << "," << (t.trapped ? 1 : 0) << "," << (t.escape ? to_string(*t.escape) : "")
        << "," << csv_opt(t.best) << "," << csv_opt(t.reported) << "," << csv_opt(t.reported_median) << ","
        << format_double(t.kappa) << "," << csv_opt(t.tau) << "," << format_double(t.cumulative) << ","
        << format_double(t.angle_deg) << "," << format_double(t.alpha) << "," << format_double(t.alpha_b1) << ","
        << format_double(t.alpha_b2) << "," << format_double(t.beta) << "," << format_double(t.goal_range);
    for (const auto& m : metrics) {
      out << ",";
      if (k < obs.size())
        if (auto it = obs[k].metrics.find(m); it != obs[k].metrics.end()) out << format_double(it->second);
    }
    out << "\n";
  }
}

std::string campaign_json(const CampaignSpec& spec, const CampaignResult& result) {
  const ParameterSpace& space = spec.engine.space;
  ordered_json truth = nullptr;
  if (result.ground_truth)
    truth = {{"index", *result.ground_truth}, {"params", params_json(space, *result.ground_truth)}};
  ordered_json failures = ordered_json::array();
  for (const auto& it : result.iterations)
    if (it.failed) failures.push_back({{"seed", it.seed}, {"error", it.error}});
  ordered_json timing = ordered_json::array();
  for (const auto& t : result.timing)
    timing.push_back({{"metric", t.metric},
                      {"threshold", t.threshold},
                      {"count", t.count},
                      {"mean_signed", t.mean_signed},
                      {"mean_absolute", t.mean_absolute}});

  ordered_json doc = {
      {"schema_version", kSchemaVersion},
      {"kind", "campaign"},
      {"approach", result.approach},
      {"budget", result.budget},
      {"iterations", result.iterations.size()},
      {"base_seed", spec.base_seed},
      {"n_init", spec.engine.n_init},
      {"init_strategy", to_string(spec.engine.init_strategy)},
      {"space_size", result.space_size},
      {"requirement", requirement_json(spec.engine.requirement)},
      {"ground_truth", truth},
      {"satisfying_truth", result.satisfying_truth},
      {"failed", result.failed},
      {"failures", failures},
      {"em1", opt(result.em.em1)},
      {"em2", opt(result.em.em2)},
      {"em3", opt(result.em.em3)},
      {"rmsd", {{"alpha", result.rmsd_alpha}, {"alpha_b1", result.rmsd_alpha_b1}, {"alpha_b2", result.rmsd_alpha_b2}}},
      {"discovery_crossing", opt(result.discovery_crossing)},
      {"termination_timing", timing},
      {"curves",
       {{"optimality", result.optimality},
        {"mean_alpha", result.mean_alpha},
        {"mean_alpha_b1", result.mean_alpha_b1},
        {"mean_alpha_b2", result.mean_alpha_b2},
        {"discovery", result.discovery}}},
      {"heatmap_edges", result.heatmap_edges}};
  return doc.dump(2) + "\n";
}

void write_campaign_csv(std::ostream& out, const CampaignResult& result) {
  const std::size_t bins = result.heatmap_edges.empty() ? 0 : result.heatmap_edges.size() - 1;
  out << "n,optimality,mean_alpha,mean_alpha_b1,mean_alpha_b2,discovery";
  for (std::size_t b = 0; b < bins; ++b) out << ",bin_" << b;
  out << "\n";
  auto cell = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? format_double(v[k]) : ""; };
  for (std::size_t k = 0; k < static_cast<std::size_t>(result.budget); ++k) {
    out << k + 1 << "," << cell(result.optimality, k) << "," << cell(result.mean_alpha, k) << ","
        << cell(result.mean_alpha_b1, k) << "," << cell(result.mean_alpha_b2, k) << "," << cell(result.discovery, k);
    for (std::size_t b = 0; b < bins; ++b) {
      out << ",";
      if (k < result.heatmap.size() && b < result.heatmap[k].size()) out << result.heatmap[k][b];
    }
    out << "\n";
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace apex
