#include "dimseed/clock.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace dimseed {

double SteadyClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SteadyClock::sleep_until(double t) {
  const double delta = t - now();
  if (delta > 0) std::this_thread::sleep_for(std::chrono::duration<double>(delta));
}

double SimulatedClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

void SimulatedClock::sleep_until(double t) {
  std::lock_guard lock(mutex_);
  now_ = std::max(now_, t);
}

void SimulatedClock::advance(double seconds) {
  std::lock_guard lock(mutex_);
  now_ += std::max(0.0, seconds);
}

Clock& steady_clock() {
  static SteadyClock clock;
  return clock;
}

}  // namespace dimseed
