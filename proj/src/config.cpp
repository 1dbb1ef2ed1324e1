#include "apex/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace apex {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) throw ConfigError(path, "expected a mapping");
}

void require_seq(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(path, "expected a list");
}

void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
  require_map(n, path);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(join(path, key), "unknown key");
  }
}

std::string text(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, "expected a string");
  return n.Scalar();
}

double number(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, "expected a number");
  try {
    const double v = n.as<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
  } catch (const YAML::BadConversion&) {
    throw ConfigError(path, "expected a number, got '" + n.Scalar() + "'");
  }
}

int integer(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, "expected an integer");
  try {
    return n.as<int>();
  } catch (const YAML::BadConversion&) {
    throw ConfigError(path, "expected an integer, got '" + n.Scalar() + "'");
  }
}

std::uint64_t seed_value(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, "expected a non-negative integer");
  const std::string& s = n.Scalar();
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ConfigError(path, "expected a non-negative integer, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::out_of_range&) {
    throw ConfigError(path, "does not fit in 64 bits");
  }
}

std::vector<double> numbers(const YAML::Node& n, const std::string& path) {
  require_seq(n, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], at_index(path, i)));
  return out;
}

template <typename F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

// ---------------------------------------------------------------------------

ParameterDef parse_parameter(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"name", "values", "range", "unit", "scale"});
  ParameterDef def;
  if (!n["name"]) throw ConfigError(join(path, "name"), "is required");
  def.name = text(n["name"], join(path, "name"));
  if (n["values"] && n["range"]) throw ConfigError(path, "give either values or range, not both");
  if (n["values"]) {
    def.values = numbers(n["values"], join(path, "values"));
  } else if (n["range"]) {
    const std::string rp = join(path, "range");
    check_keys(n["range"], rp, {"from", "to", "step"});
    for (const char* k : {"from", "to", "step"})
      if (!n["range"][k]) throw ConfigError(join(rp, k), "is required");
    const double from = number(n["range"]["from"], join(rp, "from"));
    const double to = number(n["range"]["to"], join(rp, "to"));
    const double step = number(n["range"]["step"], join(rp, "step"));
    if (!(step > 0.0)) throw ConfigError(join(rp, "step"), "must be positive");
    if (to < from) throw ConfigError(join(rp, "to"), "must be >= from");
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
    if (count > 100000) throw ConfigError(rp, "too many values");
    for (long k = 0; k < count; ++k) def.values.push_back(from + static_cast<double>(k) * step);
  } else {
    throw ConfigError(path, "needs values or range");
  }
  if (n["unit"]) def.unit = text(n["unit"], join(path, "unit"));
  if (n["scale"]) {
    const std::string s = text(n["scale"], join(path, "scale"));
    if (s == "linear")
      def.scale = Scale::linear;
    else if (s == "log2")
      def.scale = Scale::log2;
    else
      throw ConfigError(join(path, "scale"), "expected linear or log2, got '" + s + "'");
  }
  wrap(path, [&] { def.validate(); });
  return def;
}

void parse_protocol(const YAML::Node& n, Config& cfg) {
  const std::string path = "protocol";
  check_keys(n, path, {"name", "parameters", "metrics"});
  if (n["name"]) cfg.protocol = text(n["name"], join(path, "name"));
  if (!n["parameters"]) throw ConfigError(join(path, "parameters"), "is required");
  const std::string pp = join(path, "parameters");
  require_seq(n["parameters"], pp);
  std::vector<ParameterDef> defs;
  for (std::size_t i = 0; i < n["parameters"].size(); ++i)
    defs.push_back(parse_parameter(n["parameters"][i], at_index(pp, i)));
  cfg.engine.space = wrap(pp, [&] { return enumerate_space(std::move(defs)); });

  if (n["metrics"]) {
    const std::string mp = join(path, "metrics");
    require_seq(n["metrics"], mp);
    for (std::size_t i = 0; i < n["metrics"].size(); ++i) {
      const std::string ip = at_index(mp, i);
      const YAML::Node m = n["metrics"][i];
      check_keys(m, ip, {"name", "unit"});
      if (!m["name"]) throw ConfigError(join(ip, "name"), "is required");
      const std::string name = text(m["name"], join(ip, "name"));
      if (cfg.metric_units.count(name)) throw ConfigError(join(ip, "name"), "duplicate metric '" + name + "'");
      cfg.metric_units[name] = m["unit"] ? text(m["unit"], join(ip, "unit")) : "";
    }
  }
}

Relation parse_relation(const std::string& s, const std::string& path) {
  if (s == ">=" || s == "ge" || s == "at_least") return Relation::greater_equal;
  if (s == "<=" || s == "le" || s == "at_most") return Relation::less_equal;
  throw ConfigError(path, "expected >= or <=, got '" + s + "'");
}

void check_metric(const Config& cfg, const std::string& name, const std::string& path) {
  if (!cfg.metric_units.empty() && !cfg.metric_units.count(name))
    throw ConfigError(path, "metric '" + name + "' is not declared under protocol.metrics");
}

void parse_requirement(const YAML::Node& n, Config& cfg) {
  const std::string path = "requirement";
  check_keys(n, path, {"goal", "constraints", "confidence"});
  Requirement& req = cfg.engine.requirement;
  const std::string gp = join(path, "goal");
  if (!n["goal"]) throw ConfigError(gp, "is required");
  check_keys(n["goal"], gp, {"metric", "direction"});
  if (!n["goal"]["metric"]) throw ConfigError(join(gp, "metric"), "is required");
  req.goal.name = text(n["goal"]["metric"], join(gp, "metric"));
  check_metric(cfg, req.goal.name, join(gp, "metric"));
  if (auto it = cfg.metric_units.find(req.goal.name); it != cfg.metric_units.end()) req.goal.unit = it->second;
  if (n["goal"]["direction"]) {
    const std::string d = text(n["goal"]["direction"], join(gp, "direction"));
    if (d == "minimize")
      req.goal.direction = Direction::minimize;
    else if (d == "maximize")
      req.goal.direction = Direction::maximize;
    else
      throw ConfigError(join(gp, "direction"), "expected minimize or maximize, got '" + d + "'");
  }

  if (n["constraints"]) {
    const std::string cp = join(path, "constraints");
    require_seq(n["constraints"], cp);
    for (std::size_t i = 0; i < n["constraints"].size(); ++i) {
      const std::string ip = at_index(cp, i);
      const YAML::Node c = n["constraints"][i];
      check_keys(c, ip, {"metric", "relation", "bound", "percentile"});
      for (const char* k : {"metric", "relation", "bound"})
        if (!c[k]) throw ConfigError(join(ip, k), "is required");
      ConstraintSpec spec;
      spec.metric = text(c["metric"], join(ip, "metric"));
      check_metric(cfg, spec.metric, join(ip, "metric"));
      spec.relation = parse_relation(text(c["relation"], join(ip, "relation")), join(ip, "relation"));
      spec.bound = number(c["bound"], join(ip, "bound"));
      if (c["percentile"]) {
        spec.percentile = number(c["percentile"], join(ip, "percentile"));
        if (!(spec.percentile > 0.0 && spec.percentile < 1.0))
          throw ConfigError(join(ip, "percentile"), "must lie in (0, 1)");
      }
      if (spec.metric == req.goal.name) {
        const bool floor_on_min = req.goal.direction == Direction::minimize && spec.relation == Relation::greater_equal;
        const bool cap_on_max = req.goal.direction == Direction::maximize && spec.relation == Relation::less_equal;
        if (floor_on_min || cap_on_max)
          throw ConfigError(join(ip, "relation"), "constraint on the goal metric '" + spec.metric +
                                                       "' points against the goal direction");
      }
      req.constraints.push_back(spec);
    }
  }
  if (n["confidence"]) {
    const double c = number(n["confidence"], join(path, "confidence"));
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError(join(path, "confidence"), "must lie in [0, 1]");
    req.confidence_target = c;
  }
  wrap(path, [&] { req.validate(); });
}

Landscape parse_landscape(const YAML::Node& n, const std::string& path, const ParameterSpace& space) {
  check_keys(n, path, {"kind", "offset", "scale", "center", "weights", "table", "noise_std"});
  Landscape l;
  if (n["kind"]) {
    const std::string k = text(n["kind"], join(path, "kind"));
    if (k == "quadratic")
      l.kind = Landscape::Kind::quadratic;
    else if (k == "linear")
      l.kind = Landscape::Kind::linear;
    else if (k == "table")
      l.kind = Landscape::Kind::table;
    else
      throw ConfigError(join(path, "kind"), "expected quadratic, linear or table, got '" + k + "'");
  }
  if (n["offset"]) l.offset = number(n["offset"], join(path, "offset"));
  if (n["scale"]) l.scale = number(n["scale"], join(path, "scale"));
  if (n["center"]) l.center = numbers(n["center"], join(path, "center"));
  if (n["weights"]) l.weights = numbers(n["weights"], join(path, "weights"));
  if (n["table"]) l.table = numbers(n["table"], join(path, "table"));
  if (n["noise_std"]) l.noise_std = number(n["noise_std"], join(path, "noise_std"));
  wrap(path, [&] { l.validate(space); });
  return l;
}

std::chrono::milliseconds millis(const YAML::Node& n, const std::string& path, double unit_ms) {
  const double v = number(n, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(v * unit_ms)));
}

void parse_executor(const YAML::Node& n, Config& cfg, const fs::path& base_dir) {
  const std::string path = "executor";
  require_map(n, path);
  if (!n["type"]) throw ConfigError(join(path, "type"), "is required");
  const std::string type = text(n["type"], join(path, "type"));
  ExecutorSpec& ex = cfg.executor;
  if (type == "replay") {
    check_keys(n, path, {"type", "dataset", "seed"});
    ex.kind = ExecutorKind::replay;
    if (!n["dataset"]) throw ConfigError(join(path, "dataset"), "is required for replay");
    fs::path p = text(n["dataset"], join(path, "dataset"));
    if (p.is_relative()) p = base_dir / p;
    ex.dataset = p.lexically_normal().string();
    if (n["seed"]) ex.seed = seed_value(n["seed"], join(path, "seed"));
  } else if (type == "synthetic") {
    check_keys(n, path, {"type", "seed", "metrics"});
    ex.kind = ExecutorKind::synthetic;
    if (n["seed"]) ex.synthetic.seed = seed_value(n["seed"], join(path, "seed"));
    const std::string mp = join(path, "metrics");
    if (!n["metrics"]) throw ConfigError(mp, "is required for synthetic");
    require_map(n["metrics"], mp);
    for (const auto& kv : n["metrics"]) {
      const auto name = kv.first.as<std::string>();
      ex.synthetic.metrics[name] = parse_landscape(kv.second, join(mp, name), cfg.engine.space);
    }
    for (const auto& name : cfg.engine.requirement.metric_names())
      if (!ex.synthetic.metrics.count(name)) throw ConfigError(mp, "no landscape for metric '" + name + "'");
  } else if (type == "remote") {
    check_keys(n, path,
               {"type", "url", "poll_interval_ms", "trial_duration_s", "timeout_s", "retries", "connect_timeout_ms"});
    ex.kind = ExecutorKind::remote;
    if (!n["url"]) throw ConfigError(join(path, "url"), "is required for remote");
    ex.remote.url = text(n["url"], join(path, "url"));
    if (ex.remote.url.rfind("http://", 0) != 0 && ex.remote.url.rfind("https://", 0) != 0)
      throw ConfigError(join(path, "url"), "must start with http:// or https://");
    if (n["poll_interval_ms"]) ex.remote.poll_interval = millis(n["poll_interval_ms"], join(path, "poll_interval_ms"), 1.0);
    if (n["trial_duration_s"])
      ex.remote.trial_duration = millis(n["trial_duration_s"], join(path, "trial_duration_s"), 1000.0);
    if (n["timeout_s"]) ex.remote.timeout = millis(n["timeout_s"], join(path, "timeout_s"), 1000.0);
    if (n["retries"]) {
      ex.remote.retries = integer(n["retries"], join(path, "retries"));
      if (ex.remote.retries < 0) throw ConfigError(join(path, "retries"), "must be >= 0");
    }
    if (n["connect_timeout_ms"])
      ex.remote.connect_timeout = millis(n["connect_timeout_ms"], join(path, "connect_timeout_ms"), 1.0);
  } else {
    throw ConfigError(join(path, "type"), "expected replay, synthetic or remote, got '" + type + "'");
  }
}

ParameterSet parse_suggestion(const YAML::Node& n, const std::string& path, const ParameterSpace& space) {
  require_map(n, path);
  ParameterSet set;
  std::set<std::string> known;
  for (const auto& def : space.defs()) {
    known.insert(def.name);
    if (!n[def.name]) throw ConfigError(join(path, def.name), "is required");
    set.values.push_back(number(n[def.name], join(path, def.name)));
  }
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ConfigError(join(path, key), "unknown parameter");
  }
  if (!space.find(set)) throw ConfigError(path, "is not a point of the parameter space");
  return set;
}

void parse_engine(const YAML::Node& n, Config& cfg) {
  const std::string path = "engine";
  check_keys(n, path, {"selector", "n_init", "init_strategy", "suggestions", "delta", "eta", "kernel", "rl", "seed"});
  EngineConfig& e = cfg.engine;
  if (n["selector"]) {
    const std::string s = text(n["selector"], join(path, "selector"));
    e.selector = wrap(join(path, "selector"), [&] { return selector_from_string(s); });
  }
  if (n["n_init"]) e.n_init = integer(n["n_init"], join(path, "n_init"));
  if (n["init_strategy"]) {
    const std::string s = text(n["init_strategy"], join(path, "init_strategy"));
    e.init_strategy = wrap(join(path, "init_strategy"), [&] { return init_strategy_from_string(s); });
  }
  if (n["suggestions"]) {
    const std::string sp = join(path, "suggestions");
    require_seq(n["suggestions"], sp);
    for (std::size_t i = 0; i < n["suggestions"].size(); ++i)
      e.suggestions.push_back(parse_suggestion(n["suggestions"][i], at_index(sp, i), e.space));
  }
  if (n["delta"]) e.analysis.delta = number(n["delta"], join(path, "delta"));
  if (n["eta"]) e.analysis.eta = number(n["eta"], join(path, "eta"));
  if (n["kernel"]) {
    const std::string kp = join(path, "kernel");
    const YAML::Node k = n["kernel"];
    check_keys(k, kp, {"kind", "length_scale", "signal_variance", "noise_variance", "jitter"});
    KernelConfig& kc = e.analysis.kernel;
    if (k["kind"]) {
      const std::string s = text(k["kind"], join(kp, "kind"));
      if (s == "rbf")
        kc.kind = KernelKind::rbf;
      else if (s == "matern52")
        kc.kind = KernelKind::matern52;
      else
        throw ConfigError(join(kp, "kind"), "expected rbf or matern52, got '" + s + "'");
    }
    if (k["length_scale"]) kc.length_scale = number(k["length_scale"], join(kp, "length_scale"));
    if (k["signal_variance"]) kc.signal_variance = number(k["signal_variance"], join(kp, "signal_variance"));
    if (k["noise_variance"]) kc.noise_variance = number(k["noise_variance"], join(kp, "noise_variance"));
    if (k["jitter"]) kc.jitter = number(k["jitter"], join(kp, "jitter"));
    wrap(kp, [&] { kc.validate(); });
  }
  wrap(path, [&] { e.analysis.validate(); });
  if (n["rl"]) {
    const std::string rp = join(path, "rl");
    const YAML::Node r = n["rl"];
    check_keys(r, rp, {"epsilon", "learning_rate", "discount", "penalty"});
    if (r["epsilon"]) e.rl.epsilon = number(r["epsilon"], join(rp, "epsilon"));
    if (r["learning_rate"]) e.rl.learning_rate = number(r["learning_rate"], join(rp, "learning_rate"));
    if (r["discount"]) e.rl.discount = number(r["discount"], join(rp, "discount"));
    if (r["penalty"]) e.rl.penalty = number(r["penalty"], join(rp, "penalty"));
    wrap(rp, [&] { e.rl.validate(); });
  }
  if (n["seed"]) e.seed = seed_value(n["seed"], join(path, "seed"));
}

void parse_termination(const YAML::Node& n, Config& cfg) {
  const std::string path = "termination";
  check_keys(n, path, {"max_trials", "alpha_target", "beta_target"});
  auto& t = cfg.engine.termination;
  if (n["max_trials"]) {
    t.max_trials = integer(n["max_trials"], join(path, "max_trials"));
    if (*t.max_trials < 1) throw ConfigError(join(path, "max_trials"), "must be positive");
  }
  // Out-of-range targets are accepted here; the engine reports them as unsatisfiable.
  if (n["alpha_target"]) t.alpha_target = number(n["alpha_target"], join(path, "alpha_target"));
  if (n["beta_target"]) t.beta_target = number(n["beta_target"], join(path, "beta_target"));
}

void parse_campaign(const YAML::Node& n, Config& cfg) {
  const std::string path = "campaign";
  check_keys(n, path, {"iterations", "max_trials", "base_seed", "jobs", "heatmap_bins", "alpha_thresholds"});
  auto& c = cfg.campaign;
  if (n["iterations"]) c.iterations = integer(n["iterations"], join(path, "iterations"));
  if (n["max_trials"]) c.max_trials = integer(n["max_trials"], join(path, "max_trials"));
  if (n["base_seed"]) c.base_seed = seed_value(n["base_seed"], join(path, "base_seed"));
  if (n["jobs"]) c.jobs = integer(n["jobs"], join(path, "jobs"));
  if (n["heatmap_bins"]) c.heatmap_bins = integer(n["heatmap_bins"], join(path, "heatmap_bins"));
  if (n["alpha_thresholds"]) c.alpha_thresholds = numbers(n["alpha_thresholds"], join(path, "alpha_thresholds"));
  if (c.iterations < 1) throw ConfigError(join(path, "iterations"), "must be >= 1");
  if (c.max_trials < 1) throw ConfigError(join(path, "max_trials"), "must be >= 1");
  if (c.jobs < 1) throw ConfigError(join(path, "jobs"), "must be >= 1");
  if (c.heatmap_bins < 1) throw ConfigError(join(path, "heatmap_bins"), "must be >= 1");
}

void parse_output(const YAML::Node& n, Config& cfg, const fs::path& base_dir) {
  const std::string path = "output";
  check_keys(n, path, {"directory", "run_json", "trials_csv", "campaign_json", "campaign_csv"});
  auto& o = cfg.output;
  if (n["directory"]) {
    fs::path d = text(n["directory"], join(path, "directory"));
    if (d.is_relative()) d = base_dir / d;
    o.directory = d.lexically_normal().string();
  }
  if (n["run_json"]) o.run_json = text(n["run_json"], join(path, "run_json"));
  if (n["trials_csv"]) o.trials_csv = text(n["trials_csv"], join(path, "trials_csv"));
  if (n["campaign_json"]) o.campaign_json = text(n["campaign_json"], join(path, "campaign_json"));
  if (n["campaign_csv"]) o.campaign_csv = text(n["campaign_csv"], join(path, "campaign_csv"));
}

Config parse_root(const YAML::Node& root, const fs::path& base_dir) {
  check_keys(root, "", {"protocol", "requirement", "executor", "engine", "termination", "campaign", "output"});
  Config cfg;
  if (!root["protocol"]) throw ConfigError("protocol", "is required");
  if (!root["requirement"]) throw ConfigError("requirement", "is required");
  if (!root["executor"]) throw ConfigError("executor", "is required");
  parse_protocol(root["protocol"], cfg);
  parse_requirement(root["requirement"], cfg);
  if (root["engine"]) parse_engine(root["engine"], cfg);
  parse_executor(root["executor"], cfg, base_dir);
  if (root["termination"]) parse_termination(root["termination"], cfg);
  if (root["campaign"]) parse_campaign(root["campaign"], cfg);
  if (root["output"]) parse_output(root["output"], cfg, base_dir);

  EngineConfig probe = cfg.engine;
  if (!probe.termination.any()) probe.termination.max_trials = 1;
  wrap("engine", [&] { probe.validate(); });
  return cfg;
}

YAML::Node load_yaml(const std::string& text, const std::string& source) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root.IsDefined() || root.IsNull()) throw ConfigError(source, "config is empty");
    return root;
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, std::string("invalid YAML: ") + e.what());
  }
}

struct DatasetHolder {
  std::shared_ptr<const TraceDataset> data;
};

// Keeps the dataset alive for as long as the replay executor reads it.
class OwnedReplay : private DatasetHolder, public ReplayExecutor {
 public:
  OwnedReplay(std::shared_ptr<const TraceDataset> d, std::uint64_t seed)
      : DatasetHolder{std::move(d)}, ReplayExecutor(*data, seed) {}
};

}  // namespace

const char* to_string(ExecutorKind k) {
  switch (k) {
    case ExecutorKind::replay: return "replay";
    case ExecutorKind::synthetic: return "synthetic";
    case ExecutorKind::remote: return "remote";
  }
  return "?";
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  const fs::path dir = fs::path(path).parent_path();
  Config cfg = parse_root(load_yaml(ss.str(), path), dir.empty() ? fs::path(".") : dir);
  cfg.source = path;
  return cfg;
}

Config parse_config_text(const std::string& text, const std::string& base_dir) {
  return parse_root(load_yaml(text, "<config>"), base_dir);
}

std::shared_ptr<const TraceDataset> load_dataset(const Config& config) {
  if (config.executor.kind != ExecutorKind::replay) throw ConfigError("executor.type", "a dataset needs a replay executor");
  try {
    return std::make_shared<const TraceDataset>(TraceDataset::load(config.executor.dataset, config.engine.space));
  } catch (const std::exception& e) {
    throw ConfigError("executor.dataset", e.what());
  }
}

std::unique_ptr<Executor> make_executor(const Config& config, std::shared_ptr<const TraceDataset>* dataset) {
  switch (config.executor.kind) {
    case ExecutorKind::replay: {
      auto data = load_dataset(config);
      if (dataset) *dataset = data;
      const std::uint64_t seed =
          config.executor.seed ? *config.executor.seed : derive_seed(config.engine.seed, "replay");
      return std::make_unique<OwnedReplay>(std::move(data), seed);
    }
    case ExecutorKind::synthetic:
      return std::make_unique<SyntheticExecutor>(config.engine.space, config.executor.synthetic);
    case ExecutorKind::remote:
      return std::make_unique<RemoteExecutor>(config.engine.space, config.executor.remote);
  }
  throw ConfigError("executor.type", "unsupported executor");
}

CampaignSpec make_campaign(const Config& config, const TraceDataset& dataset, SelectorKind approach) {
  CampaignSpec spec;
  spec.dataset = &dataset;
  spec.engine = config.engine;
  spec.approach = approach;
  spec.iterations = config.campaign.iterations;
  spec.max_trials = config.campaign.max_trials;
  spec.base_seed = config.campaign.base_seed ? *config.campaign.base_seed : config.engine.seed;
  spec.jobs = config.campaign.jobs;
  spec.heatmap_bins = config.campaign.heatmap_bins;
  spec.alpha_thresholds = config.campaign.alpha_thresholds;
  wrap("campaign", [&] { spec.validate(); });
  return spec;
}

}  // namespace apex
