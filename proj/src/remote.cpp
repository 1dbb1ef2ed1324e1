#include "apex/remote.hpp"

#include <httplib.h>
#include <json.hpp>

#include <stdexcept>

namespace apex {

using nlohmann::json;

const char* to_string(JobState s) {
  switch (s) {
    case JobState::queued:
      return "queued";
    case JobState::running:
      return "running";
    case JobState::done:
      return "done";
    case JobState::failed:
      return "failed";
  }
  return "unknown";
}

JobState job_state_from_string(const std::string& s) {
  if (s == "queued") return JobState::queued;
  if (s == "running") return JobState::running;
  if (s == "done") return JobState::done;
  if (s == "failed") return JobState::failed;
  throw std::invalid_argument("unknown job state '" + s + "'");
}

void TestbedJob::advance(JobState next) {
  const bool ok = (state_ == JobState::queued && next == JobState::running) ||
                  (state_ == JobState::running && (next == JobState::done || next == JobState::failed));
  if (!ok) throw std::logic_error(std::string("job cannot move from ") + to_string(state_) + " to " + to_string(next));
  state_ = next;
}

void TestbedJob::complete(Metrics metrics) {
  if (state_ == JobState::queued) advance(JobState::running);
  advance(JobState::done);
  metrics_ = std::move(metrics);
}

// ---------------------------------------------------------------------------

struct RemoteExecutor::Client {
  explicit Client(const RemoteConfig& cfg) : http(cfg.url) {
    http.set_connection_timeout(cfg.connect_timeout);
    http.set_read_timeout(cfg.connect_timeout);
    http.set_write_timeout(cfg.connect_timeout);
  }
  httplib::Client http;
};

RemoteExecutor::RemoteExecutor(ParameterSpace space, RemoteConfig config)
    : space_(std::move(space)), config_(std::move(config)), client_(std::make_unique<Client>(config_)) {
  if (config_.poll_interval.count() <= 0) throw std::invalid_argument("poll interval must be positive");
  if (config_.retries < 0) throw std::invalid_argument("retries must be >= 0");
}

RemoteExecutor::~RemoteExecutor() = default;

namespace {

template <typename Call>
json request(const char* what, int retries, Call&& call) {
  std::string last;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    auto res = call();
    if (!res) {
      last = std::string(what) + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last = std::string(what) + ": HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw HttpError(std::string(what) + ": HTTP " + std::to_string(res->status));
    try {
      return json::parse(res->body);
    } catch (const json::parse_error&) {
      throw HttpError(std::string(what) + ": response is not JSON");
    }
  }
  throw HttpError(last);
}

}  // namespace

std::optional<Metrics> RemoteExecutor::run_trial(SetIndex set, int) {
  const auto params = space_.set_of(set);
  json body{{"params", json::object()}};
  for (std::size_t q = 0; q < params.values.size(); ++q) body["params"][space_.defs()[q].name] = params.values[q];

  auto& http = client_->http;
  const json submitted = request("submit job", config_.retries,
                                 [&] { return http.Post("/jobs", body.dump(), "application/json"); });
  if (!submitted.contains("job_id")) throw HttpError("submit job: response has no job_id");
  const std::string id =
      submitted["job_id"].is_string() ? submitted["job_id"].get<std::string>() : submitted["job_id"].dump();

  const auto deadline = std::chrono::steady_clock::now() + config_.effective_timeout();
  for (;;) {
    const json status = request("job status", config_.retries, [&] { return http.Get("/jobs/" + id); });
    JobState state;
    try {
      state = job_state_from_string(status.at("state").get<std::string>());
    } catch (const std::exception& e) {
      throw HttpError(std::string("job status: ") + e.what());
    }
    if (state == JobState::failed) throw JobFailedError(id);
    if (state == JobState::done) break;
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) throw TimeoutError("testbed job '" + id + "' did not finish in time");
    std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(config_.poll_interval, deadline - now));
  }

  const json metrics = request("job metrics", config_.retries, [&] { return http.Get("/jobs/" + id + "/metrics"); });
  Metrics out;
  try {
    for (const auto& [k, v] : metrics.items()) out[k] = v.get<double>();
  } catch (const json::exception& e) {
    throw HttpError(std::string("job metrics: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------

struct MockTestbed::Server {
  httplib::Server http;
};

MockTestbed::MockTestbed(Options options) : options_(std::move(options)), server_(std::make_unique<Server>()) {
  auto& http = server_->http;
  http.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    ParamMap params;
    try {
      const json body = json::parse(req.body);
      for (const auto& [k, v] : body.at("params").items()) params[k] = v.get<double>();
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    std::lock_guard lock(mutex_);
    const std::string id = "job-" + std::to_string(next_id_++);
    TestbedJob job(id, std::move(params));
    job.advance(JobState::running);
    jobs_[id] = std::move(job);
    started_[id] = std::chrono::steady_clock::now();
    res.set_content(json{{"job_id", id}}.dump(), "application/json");
  });
  http.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(req.matches[1]);
    if (it == jobs_.end()) {
      res.status = 404;
      return;
    }
    refresh(it->second);
    res.set_content(json{{"state", to_string(it->second.state())}}.dump(), "application/json");
  });
  http.Get(R"(/jobs/([^/]+)/metrics)", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(req.matches[1]);
    if (it == jobs_.end()) {
      res.status = 404;
      return;
    }
    refresh(it->second);
    if (it->second.state() != JobState::done) {
      res.status = 409;
      return;
    }
    res.set_content(json(it->second.metrics()).dump(), "application/json");
  });
}

MockTestbed::~MockTestbed() { stop(); }

void MockTestbed::refresh(TestbedJob& job) {
  if (job.state() != JobState::running || options_.behavior == Behavior::stall) return;
  if (std::chrono::steady_clock::now() - started_[job.id()] < options_.run_time) return;
  if (options_.behavior == Behavior::fail)
    job.advance(JobState::failed);
  else
    job.complete(options_.metrics(job.params()));
}

int MockTestbed::start(int port) {
  auto& http = server_->http;
  if (port == 0) {
    port_ = http.bind_to_any_port("127.0.0.1");
  } else {
    if (!http.bind_to_port("127.0.0.1", port)) port_ = -1;
    else port_ = port;
  }
  if (port_ < 0) throw std::runtime_error("mock testbed could not bind a port");
  thread_ = std::thread([this] { server_->http.listen_after_bind(); });
  http.wait_until_ready();
  return port_;
}

void MockTestbed::listen(const std::string& host, int port) {
  port_ = port;
  if (!server_->http.listen(host, port)) throw std::runtime_error("mock testbed could not listen on port " +
                                                                  std::to_string(port));
}

void MockTestbed::stop() {
  server_->http.stop();
  if (thread_.joinable()) thread_.join();
}

std::size_t MockTestbed::job_count() const {
  std::lock_guard lock(mutex_);
  return jobs_.size();
}

}  // namespace apex
