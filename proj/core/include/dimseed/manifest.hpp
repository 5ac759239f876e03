#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dimseed/errors.hpp"
#include "dimseed/types.hpp"

namespace dimseed {

enum class ManifestIssueKind {
  malformed_line,
  unknown_camera,
  non_monotone_timestamps,
  empty_track,
  duplicate_track,
  invalid_calibration,
};

struct ManifestIssue {
  ManifestIssueKind kind;
  std::size_t line_no = 0;  // 1-based
  std::string track_id;
  std::string camera_id;
  std::string detail;

  std::string describe() const;
};

/// Raised by load_manifest when any line fails validation; carries every issue
/// found, not just the first.
class ManifestError : public Error {
 public:
  explicit ManifestError(std::vector<ManifestIssue> issues);
  const std::vector<ManifestIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ManifestIssue> issues_;
};

struct Manifest {
  std::map<std::string, CameraCalibration> calibrations;
  std::vector<VehicleTrack> tracks;  // sorted by track_id
  /// Directory crop references are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve_crop(const std::string& crop_ref) const;
  const VehicleTrack* find_track(const std::string& track_id) const;
};

/// Parses and validates a JSON Lines manifest. Validation is all-or-nothing:
/// either a fully resolved Manifest is returned or ManifestError is thrown.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view text, std::filesystem::path base_dir = {});

/// Keeps tracks whose closest approach is within max_range_m (inclusive),
/// preserving order. Throws InvalidValue if max_range_m <= 0.
std::vector<VehicleTrack> filter_by_range(const std::vector<VehicleTrack>& tracks, double max_range_m);

}  // namespace dimseed
