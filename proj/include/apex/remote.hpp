#pragma once

// HTTP client for a remote testbed, plus an in-process mock of the testbed
// service.
//
// Wire protocol (JSON bodies):
//   POST /jobs              {"params": {name: value}}  -> {"job_id": "..."}
//   GET  /jobs/{id}                                     -> {"state": "queued|running|done|failed"}
//   GET  /jobs/{id}/metrics                             -> {metric: value}

#include "apex/executor.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace apex {

using ParamMap = std::map<std::string, double>;

enum class JobState { queued, running, done, failed };

const char* to_string(JobState s);
JobState job_state_from_string(const std::string& s);

/// One testbed job. States only move forward: queued -> running -> done | failed.
class TestbedJob {
 public:
  TestbedJob() = default;
  TestbedJob(std::string id, ParamMap params) : id_(std::move(id)), params_(std::move(params)) {}

  const std::string& id() const { return id_; }
  const ParamMap& params() const { return params_; }
  JobState state() const { return state_; }
  const Metrics& metrics() const { return metrics_; }

  /// Throws std::logic_error on a backwards or repeated terminal transition.
  void advance(JobState next);
  void complete(Metrics metrics);

 private:
  std::string id_;
  ParamMap params_;
  JobState state_ = JobState::queued;
  Metrics metrics_;
};

/// Transport failure talking to the testbed; may succeed when repeated.
class HttpError : public ExecutorError {
 public:
  explicit HttpError(const std::string& what) : ExecutorError(what, true) {}
};

class TimeoutError : public ExecutorError {
 public:
  explicit TimeoutError(const std::string& what) : ExecutorError(what) {}
};

class JobFailedError : public ExecutorError {
 public:
  explicit JobFailedError(std::string job_id)
      : ExecutorError("testbed job '" + job_id + "' failed"), job_id_(std::move(job_id)) {}
  const std::string& job_id() const { return job_id_; }

 private:
  std::string job_id_;
};

struct RemoteConfig {
  std::string url = "http://127.0.0.1:8080";  // scheme://host[:port]
  std::chrono::milliseconds poll_interval{5000};
  std::chrono::milliseconds trial_duration{std::chrono::minutes(10)};
  /// Defaults to twice the trial duration when unset.
  std::optional<std::chrono::milliseconds> timeout;
  /// Extra attempts for each HTTP request after a transport failure.
  int retries = 2;
  std::chrono::milliseconds connect_timeout{2000};

  std::chrono::milliseconds effective_timeout() const { return timeout ? *timeout : 2 * trial_duration; }
};

class RemoteExecutor : public Executor {
 public:
  RemoteExecutor(ParameterSpace space, RemoteConfig config);
  ~RemoteExecutor() override;

  std::optional<Metrics> run_trial(SetIndex set, int trial_index) override;

 private:
  struct Client;
  ParameterSpace space_;
  RemoteConfig config_;
  std::unique_ptr<Client> client_;
};

/// Local stand-in for the testbed service.
class MockTestbed {
 public:
  enum class Behavior { complete, fail, stall };

  struct Options {
    Behavior behavior = Behavior::complete;
    /// Time a job spends running before it finishes.
    std::chrono::milliseconds run_time{0};
    /// Metrics for a submitted parameter set.
    std::function<Metrics(const ParamMap&)> metrics = [](const ParamMap&) { return Metrics{}; };
  };

  explicit MockTestbed(Options options);
  ~MockTestbed();
  MockTestbed(const MockTestbed&) = delete;
  MockTestbed& operator=(const MockTestbed&) = delete;

  /// Binds to 127.0.0.1 on `port` (0 picks a free port) and serves in a
  /// background thread.
  int start(int port = 0);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::size_t job_count() const;

 private:
  struct Server;
  void refresh(TestbedJob& job);

  Options options_;
  std::unique_ptr<Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::map<std::string, TestbedJob> jobs_;
  std::map<std::string, std::chrono::steady_clock::time_point> started_;
  int next_id_ = 1;
};

}  // namespace apex
