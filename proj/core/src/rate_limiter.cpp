#include "dimseed/rate_limiter.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dimseed/errors.hpp"

namespace dimseed {

RateLimiter::RateLimiter(int limit, Clock& clock, double window_s)
    : limit_(limit), window_s_(window_s), clock_(clock) {
  if (limit < 1) throw InvalidValue(fmt::format("rate limit must be >= 1, got {}", limit));
  if (!(window_s > 0.0)) throw InvalidValue("rate window must be positive");
}

double RateLimiter::reserve() {
  std::lock_guard lock(mutex_);
  double slot = clock_.now();
  if (!issued_.empty()) slot = std::max(slot, issued_.back());
  if (issued_.size() == static_cast<std::size_t>(limit_)) {
    slot = std::max(slot, issued_.front() + window_s_);
    issued_.pop_front();
  }
  issued_.push_back(slot);
  return slot;
}

double RateLimiter::acquire() {
  const double slot = reserve();
  clock_.sleep_until(slot);
  return slot;
}

}  // namespace dimseed
