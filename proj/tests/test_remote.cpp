#include "apex/remote.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace apex;
using namespace std::chrono_literals;

namespace {

RemoteConfig fast(const MockTestbed& tb) {
  RemoteConfig cfg;
  cfg.url = tb.url();
  cfg.poll_interval = 10ms;
  cfg.trial_duration = 200ms;
  cfg.timeout = 400ms;
  cfg.retries = 0;
  return cfg;
}

MockTestbed::Options options(MockTestbed::Behavior b) {
  MockTestbed::Options o;
  o.behavior = b;
  o.run_time = 30ms;
  o.metrics = [](const ParamMap& p) {
    return Metrics{{"energy", 10.0 * p.at("n_tx") - p.at("tx_power")}, {"prr", 80.0}};
  };
  return o;
}

}  // namespace

TEST(RemoteStub, HappyPathReturnsServedMetrics) {
  MockTestbed tb(options(MockTestbed::Behavior::complete));
  tb.start();
  RemoteExecutor ex(test::crystal_space(), fast(tb));
  const auto t0 = std::chrono::steady_clock::now();
  auto m = ex.run_trial(9, 1);  // tx_power -1, n_tx 2
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->at("energy"), 21.0);
  EXPECT_EQ(m->at("prr"), 80.0);
  EXPECT_EQ(tb.job_count(), 1u);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 5s);
}

TEST(RemoteStub, FailedJobSurfacesJobId) {
  MockTestbed tb(options(MockTestbed::Behavior::fail));
  tb.start();
  RemoteExecutor ex(test::crystal_space(), fast(tb));
  try {
    ex.run_trial(0, 1);
    FAIL() << "expected JobFailedError";
  } catch (const JobFailedError& e) {
    EXPECT_FALSE(e.job_id().empty());
    EXPECT_NE(std::string(e.what()).find(e.job_id()), std::string::npos);
  }
}

TEST(RemoteStub, StalledJobTimesOut) {
  MockTestbed tb(options(MockTestbed::Behavior::stall));
  tb.start();
  RemoteExecutor ex(test::crystal_space(), fast(tb));
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(ex.run_trial(0, 1), TimeoutError);
  const auto took = std::chrono::steady_clock::now() - t0;
  EXPECT_GE(took, 400ms);
  EXPECT_LT(took, 5s);
}

TEST(RemoteStub, UnreachableServerIsTransportError) {
  RemoteConfig cfg;
  cfg.url = "http://127.0.0.1:1";
  cfg.retries = 1;
  cfg.connect_timeout = 200ms;
  RemoteExecutor ex(test::crystal_space(), cfg);
  EXPECT_THROW(ex.run_trial(0, 1), HttpError);
}

TEST(TestbedJob, StateMachineIsMonotone) {
  TestbedJob j("1", {});
  j.advance(JobState::running);
  EXPECT_THROW(j.advance(JobState::queued), std::logic_error);
  j.complete({{"x", 1.0}});
  EXPECT_EQ(j.state(), JobState::done);
  EXPECT_THROW(j.advance(JobState::failed), std::logic_error);
}
