#include "apex/executor.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace apex {

using nlohmann::json;

std::size_t TraceDataset::total_records() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.size();
  return n;
}

std::vector<std::string> TraceDataset::metric_names() const {
  std::set<std::string> names;
  for (const auto& rs : records_)
    for (const auto& r : rs)
      for (const auto& [k, v] : r.metrics) names.insert(k);
  return {names.begin(), names.end()};
}

void TraceDataset::add(SetIndex set, TraceRecord record) { records_.at(set).push_back(std::move(record)); }

namespace {

struct RawRecord {
  std::vector<std::pair<std::string, double>> params;
  Metrics metrics;
  std::string run_id;
  int line = 0;
};

void report(std::vector<DatasetIssue>* issues, int line, const std::string& msg) {
  if (!issues) throw std::runtime_error("line " + std::to_string(line) + ": " + msg);
  issues->push_back({line, msg});
}

// Space from the distinct values of each parameter, in order of first use.
ParameterSpace infer_space(const std::vector<RawRecord>& raw) {
  std::vector<std::string> order;
  std::map<std::string, std::set<double>> values;
  for (const auto& r : raw)
    for (const auto& [name, v] : r.params) {
      if (!values.count(name)) order.push_back(name);
      values[name].insert(v);
    }
  std::vector<ParameterDef> defs;
  for (const auto& name : order) {
    ParameterDef d;
    d.name = name;
    d.values.assign(values[name].begin(), values[name].end());
    defs.push_back(std::move(d));
  }
  return enumerate_space(std::move(defs));
}

TraceDataset place(const std::vector<RawRecord>& raw, ParameterSpace space, std::vector<DatasetIssue>* issues) {
  TraceDataset data(space);
  for (const auto& r : raw) {
    ParameterSet set;
    bool complete = true;
    for (const auto& def : space.defs()) {
      auto it = std::find_if(r.params.begin(), r.params.end(), [&](const auto& p) { return p.first == def.name; });
      if (it == r.params.end()) {
        report(issues, r.line, "missing parameter '" + def.name + "'");
        complete = false;
        break;
      }
      set.values.push_back(it->second);
    }
    if (!complete) continue;
    if (r.params.size() != space.dimensions()) {
      report(issues, r.line, "record has parameters outside the space");
      continue;
    }
    auto j = space.find(set);
    if (!j) {
      report(issues, r.line, "parameter values are not part of the space");
      continue;
    }
    data.add(*j, {r.metrics, r.run_id, r.line});
  }
  return data;
}

ParameterDef def_from_json(const json& p) {
  ParameterDef d;
  d.name = p.at("name").get<std::string>();
  d.values = p.at("values").get<std::vector<double>>();
  if (p.contains("unit")) d.unit = p.at("unit").get<std::string>();
  if (p.contains("scale")) {
    const auto s = p.at("scale").get<std::string>();
    if (s == "log2")
      d.scale = Scale::log2;
    else if (s != "linear")
      throw std::runtime_error("unknown scale '" + s + "' for parameter '" + d.name + "'");
  }
  return d;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

}  // namespace

TraceDataset TraceDataset::read_jsonl(std::istream& in, const std::optional<ParameterSpace>& space,
                                      std::vector<DatasetIssue>* issues) {
  std::vector<RawRecord> raw;
  std::optional<ParameterSpace> header_space;
  std::map<std::string, std::string> units;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      report(issues, lineno, std::string("malformed JSON: ") + e.what());
      continue;
    }
    if (j.contains("header")) {
      if (!raw.empty() || header_space) {
        report(issues, lineno, "header must be the first record");
        continue;
      }
      const auto& h = j.at("header");
      if (h.contains("parameters")) {
        std::vector<ParameterDef> defs;
        for (const auto& p : h.at("parameters")) defs.push_back(def_from_json(p));
        header_space = enumerate_space(std::move(defs));
      }
      if (h.contains("metrics"))
        for (const auto& m : h.at("metrics"))
          units[m.at("name").get<std::string>()] = m.value("unit", std::string{});
      continue;
    }
    RawRecord r;
    r.line = lineno;
    try {
      for (const auto& [k, v] : j.at("params").items()) r.params.emplace_back(k, v.get<double>());
      for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = v.get<double>();
      if (j.contains("run_id")) r.run_id = j.at("run_id").is_string() ? j.at("run_id").get<std::string>()
                                                                       : j.at("run_id").dump();
    } catch (const json::exception& e) {
      report(issues, lineno, std::string("ill-formed record: ") + e.what());
      continue;
    }
    raw.push_back(std::move(r));
  }
  ParameterSpace s = space ? *space : header_space ? *header_space : infer_space(raw);
  if (s.size() == 0) throw std::runtime_error("dataset defines no parameters");
  TraceDataset data = place(raw, std::move(s), issues);
  data.units_ = std::move(units);
  return data;
}

TraceDataset TraceDataset::read_csv(std::istream& in, const std::optional<ParameterSpace>& space,
                                    std::vector<DatasetIssue>* issues) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file");
  const auto header = split_csv(line);
  enum class Col { param, metric, run_id, ignored };
  std::vector<std::pair<Col, std::string>> cols;
  for (const auto& h : header) {
    if (h.rfind("param:", 0) == 0)
      cols.emplace_back(Col::param, h.substr(6));
    else if (h.rfind("metric:", 0) == 0)
      cols.emplace_back(Col::metric, h.substr(7));
    else if (h == "run_id")
      cols.emplace_back(Col::run_id, h);
    else
      cols.emplace_back(Col::ignored, h);
  }
  std::vector<RawRecord> raw;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != cols.size()) {
      report(issues, lineno, "expected " + std::to_string(cols.size()) + " columns, found " +
                                 std::to_string(cells.size()));
      continue;
    }
    RawRecord r;
    r.line = lineno;
    bool ok = true;
    for (std::size_t c = 0; c < cols.size() && ok; ++c) {
      const auto& [kind, name] = cols[c];
      if (kind == Col::run_id) {
        r.run_id = cells[c];
        continue;
      }
      if (kind == Col::ignored) continue;
      if (cells[c].empty()) {
        if (kind == Col::param) {
          report(issues, lineno, "empty value for parameter '" + name + "'");
          ok = false;
        }
        continue;  // a blank metric cell means the metric is missing
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
        if (kind == Col::param)
          r.params.emplace_back(name, v);
        else
          r.metrics[name] = v;
      } catch (const std::exception&) {
        report(issues, lineno, "non-numeric value '" + cells[c] + "' in column '" + name + "'");
        ok = false;
      }
    }
    if (ok) raw.push_back(std::move(r));
  }
  ParameterSpace s = space ? *space : infer_space(raw);
  if (s.size() == 0) throw std::runtime_error("dataset defines no parameters");
  return place(raw, std::move(s), issues);
}

TraceDataset TraceDataset::load(const std::string& path, const std::optional<ParameterSpace>& space,
                                std::vector<DatasetIssue>* issues) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv ? read_csv(in, space, issues) : read_jsonl(in, space, issues);
}

void TraceDataset::write_jsonl(std::ostream& out) const {
  json params = json::array();
  for (const auto& d : space_.defs()) {
    json p{{"name", d.name}, {"values", d.values}, {"unit", d.unit}};
    if (d.scale == Scale::log2) p["scale"] = "log2";
    params.push_back(std::move(p));
  }
  json metrics = json::array();
  for (const auto& name : metric_names()) {
    auto it = units_.find(name);
    metrics.push_back({{"name", name}, {"unit", it == units_.end() ? std::string{} : it->second}});
  }
  out << json{{"header", {{"parameters", params}, {"metrics", metrics}}}}.dump() << '\n';
  for (SetIndex j = 0; j < space_.size(); ++j) {
    const auto set = space_.set_of(j);
    json p = json::object();
    for (std::size_t q = 0; q < set.values.size(); ++q) p[space_.defs()[q].name] = set.values[q];
    for (const auto& r : records_[j]) {
      json m(r.metrics);
      out << json{{"params", p}, {"metrics", m}, {"run_id", r.run_id}}.dump() << '\n';
    }
  }
}

double dataset_median(const TraceDataset& data, SetIndex set, const std::string& metric) {
  std::vector<double> v;
  for (const auto& r : data.records(set)) {
    auto it = r.metrics.find(metric);
    if (it != r.metrics.end()) v.push_back(it->second);
  }
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return median(std::move(v));
}

// ---------------------------------------------------------------------------

ReplayExecutor::ReplayExecutor(const TraceDataset& data, std::uint64_t seed)
    : data_(&data), rng_(seed), remaining_(data.space().size()) {
  for (SetIndex j = 0; j < remaining_.size(); ++j) {
    const std::size_t n = data.records(j).size();
    for (std::size_t r = 0; r < n; ++r) remaining_[j].push_back(r);
    remaining_total_ += n;
  }
}

std::optional<SetIndex> ReplayExecutor::donor(SetIndex set) const {
  std::optional<SetIndex> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (SetIndex j = 0; j < remaining_.size(); ++j) {
    if (remaining_[j].empty()) continue;
    const double d = normalized_distance(data_->space(), set, j);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

bool ReplayExecutor::exhausted(SetIndex set) const {
  if (data_->recorded(set)) return remaining_.at(set).empty();
  return !donor(set).has_value();
}

std::optional<Metrics> ReplayExecutor::run_trial(SetIndex set, int) {
  if (remaining_total_ == 0) throw DatasetExhausted();
  SetIndex source = set;
  if (!data_->recorded(set)) {
    auto d = donor(set);
    if (!d) throw DatasetExhausted();
    source = *d;
  } else if (remaining_[set].empty()) {
    return std::nullopt;
  }
  auto& pool = remaining_[source];
  const std::size_t k = uniform_index(rng_, pool.size());
  const std::size_t record = pool[k];
  pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  --remaining_total_;
  consumed_.push_back({set, source, record});
  return data_->records(source)[record].metrics;
}

// ---------------------------------------------------------------------------

double Landscape::value(const ParameterSpace& space, SetIndex set) const {
  switch (kind) {
    case Kind::quadratic: {
      const Eigen::VectorXd u = space.normalized(set);
      double r2 = 0.0;
      for (Eigen::Index q = 0; q < u.size(); ++q) r2 += std::pow(u(q) - center[static_cast<std::size_t>(q)], 2);
      return offset + scale * r2;
    }
    case Kind::linear: {
      const Eigen::VectorXd u = space.normalized(set);
      double v = offset;
      for (Eigen::Index q = 0; q < u.size(); ++q) v += weights[static_cast<std::size_t>(q)] * u(q);
      return v;
    }
    case Kind::table:
      return table.at(set);
  }
  return 0.0;
}

void Landscape::validate(const ParameterSpace& space) const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw std::invalid_argument("noise_std must be >= 0");
  switch (kind) {
    case Kind::quadratic:
      if (center.size() != space.dimensions())
        throw std::invalid_argument("quadratic landscape needs one center coordinate per parameter");
      break;
    case Kind::linear:
      if (weights.size() != space.dimensions())
        throw std::invalid_argument("linear landscape needs one weight per parameter");
      break;
    case Kind::table:
      if (table.size() != space.size()) throw std::invalid_argument("table landscape needs one value per set");
      break;
  }
}

SyntheticExecutor::SyntheticExecutor(ParameterSpace space, SyntheticSpec spec)
    : space_(std::move(space)), spec_(std::move(spec)) {
  if (spec_.metrics.empty()) throw std::invalid_argument("synthetic executor needs at least one metric");
  for (const auto& [name, l] : spec_.metrics) l.validate(space_);
}

std::optional<Metrics> SyntheticExecutor::run_trial(SetIndex set, int trial_index) {
  Metrics out;
  const std::uint64_t trial_seed = derive_seed(spec_.seed, static_cast<std::uint64_t>(trial_index));
  for (const auto& [name, l] : spec_.metrics) {
    double v = l.value(space_, set);
    if (l.noise_std > 0.0) {
      Rng rng(derive_seed(trial_seed, name));
      v += l.noise_std * standard_normal(rng);
    }
    out[name] = v;
  }
  return out;
}

}  // namespace apex
