#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

#include "dimseed/clock.hpp"
#include "dimseed/errors.hpp"
#include "dimseed/gateway.hpp"
#include "support/scratch.hpp"

using namespace dimseed;
using dimseed::testing::ScratchDir;

namespace {

class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend(Clock& clock, int transient_failures, std::optional<double> retry_after = std::nullopt)
      : clock_(clock), failures_(transient_failures), retry_after_(retry_after) {}

  std::string complete(const BackendRequest& request) override {
    {
      std::lock_guard lock(mutex_);
      calls.push_back(clock_.now());
      if (failures_ > 0) {
        --failures_;
        throw TransientBackendError("503", retry_after_);
      }
    }
    if (jitter_us > 0) {
      thread_local std::mt19937 rng(std::hash<std::thread::id>{}(std::this_thread::get_id()));
      std::this_thread::sleep_for(std::chrono::microseconds(std::uniform_int_distribution<int>(0, jitter_us)(rng)));
    }
    return "echo:" + request.track_id;
  }
  std::string name() const override { return "scripted"; }

  std::vector<double> calls;
  int jitter_us = 0;

 private:
  Clock& clock_;
  std::mutex mutex_;
  int failures_;
  std::optional<double> retry_after_;
};

class FailingBackend final : public Backend {
 public:
  explicit FailingBackend(int kind) : kind_(kind) {}
  std::string complete(const BackendRequest&) override {
    ++calls;
    if (kind_ == 0) throw AuthError("401");
    throw BackendUnavailable("400 bad request");
  }
  std::string name() const override { return "failing"; }
  std::atomic<int> calls{0};

 private:
  int kind_;
};

InferenceJob job(const std::string& id, int images = 2, PromptVariant v = PromptVariant::basic) {
  InferenceJob j{id, build_prompt(v, SamplerConfig{3}), {}};
  for (int i = 0; i < images; ++i) j.images.push_back({id + std::to_string(i), "image/jpeg"});
  return j;
}

BackendConfig config(int rpm = 1000, int retries = 3, int parallel = 4) {
  BackendConfig c;
  c.backend_kind = BackendKind::fixed_stub;
  c.model_name = "m";
  c.requests_per_minute = rpm;
  c.max_retries = retries;
  c.max_parallel = parallel;
  return c;
}

}  // namespace

TEST(Gateway, RetriesTransientFailuresWithBackoff) {
  SimulatedClock clock;
  auto backend = std::make_unique<ScriptedBackend>(clock, 2);
  auto* b = backend.get();
  Gateway g(config(), std::move(backend), GatewayOptions{std::nullopt, &clock, 1});
  const auto out = g.infer(job("t"));
  EXPECT_EQ(out.raw_text, "echo:t");
  EXPECT_EQ(out.attempt_count, 3);
  ASSERT_EQ(b->calls.size(), 3u);
  // Delay before attempt k+1 lies in [0.5, 1] * base * factor^(k-1).
  const double d1 = b->calls[1] - b->calls[0];
  const double d2 = b->calls[2] - b->calls[1];
  EXPECT_GE(d1, 0.5);
  EXPECT_LE(d1, 1.0);
  EXPECT_GE(d2, 1.0);
  EXPECT_LE(d2, 2.0);
  EXPECT_EQ(g.stats().retries, 2u);
  EXPECT_EQ(out.decoding, "provider_default");
}

TEST(Gateway, HonoursRetryAfter) {
  SimulatedClock clock;
  auto backend = std::make_unique<ScriptedBackend>(clock, 1, 30.0);
  auto* b = backend.get();
  Gateway g(config(), std::move(backend), GatewayOptions{std::nullopt, &clock, 1});
  g.infer(job("t"));
  ASSERT_EQ(b->calls.size(), 2u);
  EXPECT_GE(b->calls[1] - b->calls[0], 30.0);
}

TEST(Gateway, GivesUpAfterMaxRetries) {
  SimulatedClock clock;
  auto backend = std::make_unique<ScriptedBackend>(clock, 100);
  auto* b = backend.get();
  Gateway g(config(1000, 2), std::move(backend), GatewayOptions{std::nullopt, &clock, 1});
  EXPECT_THROW(g.infer(job("t")), BackendUnavailable);
  EXPECT_EQ(b->calls.size(), 3u);
}

TEST(Gateway, AuthAndPermanentErrorsAreNotRetried) {
  SimulatedClock clock;
  for (int kind : {0, 1}) {
    auto backend = std::make_unique<FailingBackend>(kind);
    auto* b = backend.get();
    Gateway g(config(), std::move(backend), GatewayOptions{std::nullopt, &clock, 1});
    if (kind == 0) {
      EXPECT_THROW(g.infer(job("t")), AuthError);
    } else {
      EXPECT_THROW(g.infer(job("t")), BackendUnavailable);
    }
    EXPECT_EQ(b->calls.load(), 1);
  }
}

TEST(Gateway, OversizedInputRejectedBeforeAnyCall) {
  SimulatedClock clock;
  auto backend = std::make_unique<ScriptedBackend>(clock, 0);
  auto* b = backend.get();
  Gateway g(config(), std::move(backend), GatewayOptions{std::nullopt, &clock, 1});
  EXPECT_THROW(g.infer(job("t", 4)), OversizedInput);  // bundle allows 3
  EXPECT_THROW(g.infer(job("t", 0)), OversizedInput);
  EXPECT_TRUE(b->calls.empty());
}

TEST(Gateway, CacheHitsSkipTheBackend) {
  ScratchDir dir("gw_cache");
  SimulatedClock clock;
  {
    Gateway g(config(), std::make_unique<FixedStubBackend>("{\"x\":1}"), GatewayOptions{dir.path(), &clock, 1});
    const auto first = g.infer(job("t"));
    EXPECT_FALSE(first.from_cache);
    EXPECT_EQ(g.stats().backend_calls, 1u);
  }
  auto failing = std::make_unique<FailingBackend>(1);
  auto* f = failing.get();
  Gateway g(config(), std::move(failing), GatewayOptions{dir.path(), &clock, 1});
  const auto again = g.infer(job("t"));
  EXPECT_TRUE(again.from_cache);
  EXPECT_EQ(again.raw_text, "{\"x\":1}");
  EXPECT_EQ(again.attempt_count, 0);
  EXPECT_EQ(f->calls.load(), 0);
  EXPECT_EQ(g.stats().cache_hits, 1u);
}

TEST(Gateway, BatchPreservesInputOrderAndIsolatesFailures) {
  SimulatedClock clock;
  auto backend = std::make_unique<ScriptedBackend>(clock, 0);
  backend->jitter_us = 400;
  Gateway g(config(100000, 0, 8), std::move(backend), GatewayOptions{std::nullopt, &clock, 1});
  std::vector<InferenceJob> jobs;
  for (int i = 0; i < 64; ++i) jobs.push_back(job("t" + std::to_string(i), i == 17 ? 9 : 1));
  const auto results = g.infer_batch(jobs);
  ASSERT_EQ(results.size(), jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (i == 17) {
      ASSERT_FALSE(results[i].ok());
      EXPECT_EQ(results[i].error->kind, InferErrorKind::oversized_input);
      continue;
    }
    ASSERT_TRUE(results[i].ok());
    EXPECT_EQ(results[i].inference->raw_text, "echo:" + jobs[i].track_id);
  }
  EXPECT_THROW(g.infer_batch({}), InvalidValue);
}

TEST(Gateway, SequentialCallsRespectRequestsPerMinute) {
  SimulatedClock clock;
  auto backend = std::make_unique<ScriptedBackend>(clock, 0);
  auto* b = backend.get();
  Gateway g(config(5, 0, 1), std::move(backend), GatewayOptions{std::nullopt, &clock, 1});
  for (int i = 0; i < 17; ++i) g.infer(job("t" + std::to_string(i)));
  ASSERT_EQ(b->calls.size(), 17u);
  for (std::size_t i = 5; i < b->calls.size(); ++i) EXPECT_GE(b->calls[i] - b->calls[i - 5], 60.0);
}
