#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dimseed {

/// Vehicle extents in meters. Construction through `make` enforces strictly
/// positive, finite values; length >= width is deliberately not required.
struct Dimensions {
  double length_m = 0.0;
  double width_m = 0.0;
  double height_m = 0.0;

  /// Throws NonPositiveDims if any value is non-positive or non-finite.
  static Dimensions make(double length_m, double width_m, double height_m);

  bool valid() const noexcept;
  std::array<double, 3> as_array() const noexcept { return {length_m, width_m, height_m}; }

  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

enum class VehicleType { sedan, suv, pickup_truck, van, hatchback, other };

inline constexpr std::array<VehicleType, 5> k_main_vehicle_types = {
    VehicleType::sedan, VehicleType::suv, VehicleType::pickup_truck, VehicleType::van,
    VehicleType::hatchback};

std::string_view to_string(VehicleType type) noexcept;
/// Accepts the canonical snake_case names only; throws InvalidValue otherwise.
VehicleType parse_vehicle_type(std::string_view text);
/// Looser mapping for model output ("SUV", "pickup truck", "minivan", ...).
std::optional<VehicleType> vehicle_type_from_label(std::string_view text) noexcept;
/// Display name used in report headers ("Pickup Truck").
std::string_view display_name(VehicleType type) noexcept;

struct YearRange {
  int start_year = 0;
  int end_year = 0;

  /// Throws InvalidYearRange unless 1900 <= start <= end <= 2100.
  static YearRange make(int start_year, int end_year);
  bool overlaps(const YearRange& other) const noexcept {
    return start_year <= other.end_year && other.start_year <= end_year;
  }
  std::string to_string() const;

  friend bool operator==(const YearRange&, const YearRange&) = default;
};

struct CameraCalibration {
  std::string camera_id;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  /// Vehicle frame -> camera frame: p_cam = rotation * p_vehicle + translation.
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int image_width = 0;
  int image_height = 0;

  /// Empty string when valid, otherwise a description of the first problem.
  std::string validate() const;
};

struct Box3d {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Dimensions dims;
  double heading = 0.0;
};

struct Observation {
  double timestamp = 0.0;
  std::string camera_id;
  Box3d box;
  std::string crop_ref;
};

struct GroundTruthLabel {
  Dimensions dims;
  VehicleType vehicle_type = VehicleType::other;
  std::optional<std::string> make;
  std::optional<std::string> model;
  std::optional<YearRange> generation_range;
  std::optional<bool> modified_truth;
};

struct VehicleTrack {
  std::string track_id;
  std::vector<Observation> observations;
  std::optional<GroundTruthLabel> label;
  double min_range_m = 0.0;
};

}  // namespace dimseed
