#include "dimseed/sampler.hpp"

#include <fmt/format.h>

#include "dimseed/errors.hpp"
#include "dimseed/geometry.hpp"

namespace dimseed {

std::vector<BestViewFrame> select_best_views(const VehicleTrack& track,
                                             const std::map<std::string, CameraCalibration>& calibrations) {
  // Observations are sorted by timestamp, so equal timestamps are contiguous.
  std::vector<BestViewFrame> frames;
  const auto& obs = track.observations;
  for (std::size_t begin = 0; begin < obs.size();) {
    std::size_t end = begin;
    while (end < obs.size() && obs[end].timestamp == obs[begin].timestamp) ++end;

    const Observation* best = nullptr;
    double best_area = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      auto cal = calibrations.find(obs[i].camera_id);
      if (cal == calibrations.end()) continue;
      const double area = projected_area(obs[i].box, cal->second).area_px;
      if (area <= 0.0) continue;
      if (best == nullptr || area > best_area || (area == best_area && obs[i].camera_id < best->camera_id)) {
        best = &obs[i];
        best_area = area;
      }
    }
    if (best != nullptr) frames.push_back({best->timestamp, best->camera_id, best_area, best->crop_ref});
    begin = end;
  }
  return frames;
}

std::vector<std::size_t> uniform_indices(std::size_t frame_count, int n) {
  if (n < 1) throw InvalidValue(fmt::format("sample size must be >= 1, got {}", n));
  std::vector<std::size_t> idx;
  if (frame_count == 0) return idx;
  const auto budget = static_cast<std::size_t>(n);
  if (frame_count <= budget) {
    for (std::size_t i = 0; i < frame_count; ++i) idx.push_back(i);
    return idx;
  }
  if (budget == 1) return {frame_count / 2};  // round_half_up((M-1)/2)

  // round_half_up(i * (M-1) / (n-1)) in exact integer arithmetic.
  const std::size_t span = frame_count - 1;
  const std::size_t denom = budget - 1;
  for (std::size_t i = 0; i < budget; ++i) {
    const std::size_t k = (2 * i * span + denom) / (2 * denom);
    if (idx.empty() || idx.back() != k) idx.push_back(k);
  }
  return idx;
}

std::vector<BestViewFrame> sample_uniform(const std::vector<BestViewFrame>& frames, int n) {
  std::vector<BestViewFrame> out;
  for (std::size_t i : uniform_indices(frames.size(), n)) out.push_back(frames[i]);
  return out;
}

}  // namespace dimseed
