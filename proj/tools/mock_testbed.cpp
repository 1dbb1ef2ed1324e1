// Serves the testbed job API locally. Metrics come from a recorded dataset
// (records of the matching set, in turn) or from the planted benchmark.

#include "apex/executor.hpp"
#include "apex/harness.hpp"
#include "apex/remote.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <map>
#include <mutex>

namespace {

apex::MockTestbed* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local stand-in for the testbed job service", "mock-testbed"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string behavior = "complete";
  int run_time_ms = 0;
  std::string dataset_path;
  app.add_option("--host", host, "Address to bind");
  app.add_option("--port", port, "Port to bind");
  app.add_option("--behavior", behavior, "complete, fail or stall")
      ->check(CLI::IsMember({"complete", "fail", "stall"}));
  app.add_option("--run-time-ms", run_time_ms, "Time each job spends running");
  app.add_option("--dataset", dataset_path, "Dataset to serve records from");
  CLI11_PARSE(app, argc, argv);

  apex::MockTestbed::Options options;
  options.behavior = behavior == "fail"    ? apex::MockTestbed::Behavior::fail
                     : behavior == "stall" ? apex::MockTestbed::Behavior::stall
                                           : apex::MockTestbed::Behavior::complete;
  options.run_time = std::chrono::milliseconds(run_time_ms);

  std::optional<apex::TraceDataset> data;
  apex::PlantedProblem planted;
  if (!dataset_path.empty()) {
    try {
      data = apex::TraceDataset::load(dataset_path);
    } catch (const std::exception& e) {
      std::cerr << "cannot load " << dataset_path << ": " << e.what() << "\n";
      return 2;
    }
  } else {
    planted = apex::planted_problem();
  }
  const apex::ParameterSpace& space = data ? data->space() : planted.space;

  auto next = std::make_shared<std::map<apex::SetIndex, std::size_t>>();
  auto lock = std::make_shared<std::mutex>();
  options.metrics = [&, next, lock](const apex::ParamMap& params) -> apex::Metrics {
    apex::ParameterSet set;
    for (const auto& def : space.defs()) {
      auto it = params.find(def.name);
      if (it == params.end()) return {};
      set.values.push_back(it->second);
    }
    const auto j = space.find(set);
    if (!j) return {};
    if (!data) return {{"energy", planted.energy[*j]}, {"prr", planted.prr[*j]}};
    const auto& recs = data->records(*j);
    if (recs.empty()) return {};
    std::lock_guard<std::mutex> guard(*lock);
    return recs[(*next)[*j]++ % recs.size()].metrics;
  };

  apex::MockTestbed server(options);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "serving on http://" << host << ":" << port << std::endl;
  server.listen(host, port);
  return 0;
}
