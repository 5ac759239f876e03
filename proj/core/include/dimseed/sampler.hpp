#pragma once

#include <map>
#include <string>
#include <vector>

#include "dimseed/types.hpp"

namespace dimseed {

struct SamplerConfig {
  /// Maximum number of context images sent per request.
  int n_images = 10;
};

struct BestViewFrame {
  double timestamp = 0.0;
  std::string camera_id;
  double area_px = 0.0;
  std::string crop_ref;
};

/// One frame per timestamp: the camera whose projected box area is largest.
/// Ties go to the lexicographically smallest camera_id; timestamps where no
/// camera sees the box are dropped. Observations whose camera is missing from
/// `calibrations` are ignored.
std::vector<BestViewFrame> select_best_views(const VehicleTrack& track,
                                             const std::map<std::string, CameraCalibration>& calibrations);

/// Evenly spaced subsequence of at most n frames. For n >= 2 the indices are
/// round_half_up(i * (M - 1) / (n - 1)), so both endpoints are kept; n == 1
/// takes the middle frame. Throws InvalidValue if n < 1.
std::vector<BestViewFrame> sample_uniform(const std::vector<BestViewFrame>& frames, int n);

/// Index selection behind sample_uniform, exposed for the endpoint tests.
std::vector<std::size_t> uniform_indices(std::size_t frame_count, int n);

}  // namespace dimseed
