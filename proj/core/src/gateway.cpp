#include "dimseed/gateway.hpp"

#include <cmath>
#include <thread>

#include <fmt/format.h>

namespace dimseed {

std::string_view to_string(InferErrorKind kind) noexcept {
  switch (kind) {
    case InferErrorKind::backend_unavailable: return "backend_unavailable";
    case InferErrorKind::auth: return "auth";
    case InferErrorKind::oversized_input: return "oversized_input";
    case InferErrorKind::other: return "other";
  }
  return "other";
}

Gateway::Gateway(BackendConfig config, std::unique_ptr<Backend> backend, GatewayOptions options)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      clock_(options.clock != nullptr ? *options.clock : steady_clock()),
      limiter_(config_.requests_per_minute, clock_),
      rng_(options.seed) {
  if (!backend_) throw ConfigError("gateway requires a backend");
  if (config_.max_parallel < 1 || config_.max_retries < 0) throw ConfigError("invalid gateway limits");
  if (options.cache_dir) cache_.emplace(*options.cache_dir);
}

double Gateway::backoff_delay(int attempt) {
  const double nominal = config_.backoff_base_s * std::pow(config_.backoff_factor, attempt - 1);
  std::lock_guard lock(rng_mutex_);
  std::uniform_real_distribution<double> jitter(0.5, 1.0);
  return nominal * jitter(rng_);
}

RawInference Gateway::infer(const InferenceJob& job) {
  if (job.images.empty()) throw OversizedInput(fmt::format("track '{}': no images to send", job.track_id));
  if (static_cast<int>(job.images.size()) > job.bundle.max_images) {
    throw OversizedInput(fmt::format("track '{}': {} images exceed the limit of {}", job.track_id, job.images.size(),
                                     job.bundle.max_images));
  }

  RawInference out;
  out.track_id = job.track_id;
  out.variant = job.bundle.variant;
  out.cache_key = cache_key(config_.model_name, job.bundle.system_text, job.bundle.user_text, job.images);

  const double started = clock_.now();
  if (cache_) {
    if (auto hit = cache_->get(config_.model_name, out.cache_key)) {
      ++cache_hits_;
      out.raw_text = std::move(*hit);
      out.from_cache = true;
      out.latency_s = clock_.now() - started;
      return out;
    }
  }

  BackendRequest request{job.track_id, &job.bundle, job.images, config_.model_name, out.cache_key};
  const int max_attempts = config_.max_retries + 1;
  for (int attempt = 1;; ++attempt) {
    limiter_.acquire();
    ++backend_calls_;
    out.attempt_count = attempt;
    try {
      out.raw_text = backend_->complete(request);
      break;
    } catch (const TransientBackendError& e) {
      if (attempt >= max_attempts) {
        throw BackendUnavailable(fmt::format("track '{}': giving up after {} attempt(s): {}", job.track_id,
                                             attempt, e.what()));
      }
      ++retries_;
      double delay = backoff_delay(attempt);
      if (auto hint = e.retry_after_s()) delay = std::max(delay, *hint);
      clock_.sleep_for(delay);
    } catch (const AuthError& e) {
      throw AuthError(fmt::format("track '{}': {}", job.track_id, e.what()));
    } catch (const BackendUnavailable& e) {
      throw BackendUnavailable(fmt::format("track '{}': {}", job.track_id, e.what()));
    }
  }
  out.latency_s = clock_.now() - started;
  if (cache_) cache_->put(config_.model_name, out.cache_key, out.raw_text);
  return out;
}

std::vector<InferResult> Gateway::infer_batch(const std::vector<InferenceJob>& jobs) {
  if (jobs.empty()) throw InvalidValue("infer_batch requires at least one job");
  std::vector<InferResult> results(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      InferResult& slot = results[i];
      try {
        slot.inference = infer(jobs[i]);
      } catch (const OversizedInput& e) {
        slot.error = InferError{InferErrorKind::oversized_input, e.what()};
      } catch (const AuthError& e) {
        slot.error = InferError{InferErrorKind::auth, e.what()};
      } catch (const BackendUnavailable& e) {
        slot.error = InferError{InferErrorKind::backend_unavailable, e.what()};
      } catch (const std::exception& e) {
        slot.error = InferError{InferErrorKind::other, e.what()};
      }
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config_.max_parallel), jobs.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

GatewayStats Gateway::stats() const {
  return GatewayStats{backend_calls_.load(), cache_hits_.load(), retries_.load()};
}

}  // namespace dimseed
