#pragma once

#include <mutex>

namespace dimseed {

/// Seconds on a monotonic timeline. The gateway takes time and sleeps only
/// through this interface so tests can substitute a simulated clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
  virtual void sleep_until(double t) = 0;
  void sleep_for(double seconds) { sleep_until(now() + seconds); }
};

class SteadyClock final : public Clock {
 public:
  double now() override;
  void sleep_until(double t) override;
};

/// Time advances only when someone sleeps past the current instant.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(double start = 0.0) : now_(start) {}
  double now() override;
  void sleep_until(double t) override;
  void advance(double seconds);

 private:
  std::mutex mutex_;
  double now_;
};

Clock& steady_clock();

}  // namespace dimseed
