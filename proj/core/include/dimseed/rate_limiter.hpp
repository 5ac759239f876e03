#pragma once

#include <deque>
#include <mutex>

#include "dimseed/clock.hpp"

namespace dimseed {

/// Admits at most `limit` requests in any half-open window of `window_s`
/// seconds. Each token is handed out at a reserved instant and returns to the
/// bucket exactly one window later, so bursts up to `limit` are allowed but
/// the sliding-window bound is never exceeded.
class RateLimiter {
 public:
  RateLimiter(int limit, Clock& clock, double window_s = 60.0);

  /// Reserves the earliest admissible instant, sleeps until it and returns it.
  double acquire();
  /// Reserves a slot without sleeping.
  double reserve();

  int limit() const noexcept { return limit_; }

 private:
  int limit_;
  double window_s_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<double> issued_;  // last `limit_` reservation instants, ascending
};

}  // namespace dimseed
