#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dimseed/backends.hpp"
#include "dimseed/clock.hpp"
#include "dimseed/promptkit.hpp"
#include "dimseed/rate_limiter.hpp"
#include "dimseed/response_cache.hpp"

namespace dimseed {

struct RawInference {
  std::string track_id;
  PromptVariant variant = PromptVariant::refined_vmmgr;
  std::string raw_text;
  double latency_s = 0.0;
  int attempt_count = 0;  // 0 for cache hits
  bool from_cache = false;
  std::string cache_key;
  /// Decoding parameters sent with the request; none are set explicitly.
  std::string decoding = "provider_default";
};

struct InferenceJob {
  std::string track_id;
  PromptBundle bundle;
  std::vector<ImageBlob> images;
};

enum class InferErrorKind { backend_unavailable, auth, oversized_input, other };

std::string_view to_string(InferErrorKind kind) noexcept;

struct InferError {
  InferErrorKind kind = InferErrorKind::other;
  std::string message;
};

/// One slot of a batch: exactly one of the two members is set.
struct InferResult {
  std::optional<RawInference> inference;
  std::optional<InferError> error;

  bool ok() const noexcept { return inference.has_value(); }
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  Clock* clock = nullptr;  // defaults to the steady clock
  std::uint64_t seed = 0x5eedULL;
};

struct GatewayStats {
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t retries = 0;
};

/// Thread-safe dispatcher in front of one backend: rate limiting, retries
/// with jittered exponential backoff, and an optional on-disk cache.
class Gateway {
 public:
  Gateway(BackendConfig config, std::unique_ptr<Backend> backend, GatewayOptions options = {});

  /// Throws OversizedInput, AuthError or BackendUnavailable.
  RawInference infer(const InferenceJob& job);

  /// Results in input order; failures are recorded per slot.
  std::vector<InferResult> infer_batch(const std::vector<InferenceJob>& jobs);

  GatewayStats stats() const;
  const BackendConfig& config() const noexcept { return config_; }
  std::string backend_name() const { return backend_->name(); }

 private:
  double backoff_delay(int attempt);

  BackendConfig config_;
  std::unique_ptr<Backend> backend_;
  Clock& clock_;
  RateLimiter limiter_;
  std::optional<ResponseCache> cache_;

  std::mutex rng_mutex_;
  std::mt19937_64 rng_;

  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> retries_{0};
};

}  // namespace dimseed
