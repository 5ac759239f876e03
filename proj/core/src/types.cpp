#include "dimseed/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "dimseed/errors.hpp"

namespace dimseed {

namespace {

std::string lowercase_letters(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

}  // namespace

Dimensions Dimensions::make(double length_m, double width_m, double height_m) {
  Dimensions d{length_m, width_m, height_m};
  if (!d.valid()) {
    throw NonPositiveDims(
        fmt::format("dimensions must be positive and finite, got ({}, {}, {})", length_m, width_m, height_m));
  }
  return d;
}

bool Dimensions::valid() const noexcept {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  return ok(length_m) && ok(width_m) && ok(height_m);
}

std::string_view to_string(VehicleType type) noexcept {
  switch (type) {
    case VehicleType::sedan: return "sedan";
    case VehicleType::suv: return "suv";
    case VehicleType::pickup_truck: return "pickup_truck";
    case VehicleType::van: return "van";
    case VehicleType::hatchback: return "hatchback";
    case VehicleType::other: return "other";
  }
  return "other";
}

std::string_view display_name(VehicleType type) noexcept {
  switch (type) {
    case VehicleType::sedan: return "Sedan";
    case VehicleType::suv: return "SUV";
    case VehicleType::pickup_truck: return "Pickup Truck";
    case VehicleType::van: return "Van";
    case VehicleType::hatchback: return "Hatchback";
    case VehicleType::other: return "Other";
  }
  return "Other";
}

VehicleType parse_vehicle_type(std::string_view text) {
  for (auto type : {VehicleType::sedan, VehicleType::suv, VehicleType::pickup_truck, VehicleType::van,
                    VehicleType::hatchback, VehicleType::other}) {
    if (text == to_string(type)) return type;
  }
  throw InvalidValue(fmt::format("unknown vehicle type '{}'", text));
}

std::optional<VehicleType> vehicle_type_from_label(std::string_view text) noexcept {
  const std::string key = lowercase_letters(text);
  if (key == "sedan") return VehicleType::sedan;
  if (key == "suv") return VehicleType::suv;
  if (key == "pickuptruck" || key == "pickup" || key == "truck") return VehicleType::pickup_truck;
  if (key == "van" || key == "minivan") return VehicleType::van;
  if (key == "hatchback") return VehicleType::hatchback;
  if (key == "other") return VehicleType::other;
  return std::nullopt;
}

YearRange YearRange::make(int start_year, int end_year) {
  if (start_year < 1900 || end_year > 2100 || start_year > end_year) {
    throw InvalidYearRange(fmt::format("invalid year range {}-{}", start_year, end_year));
  }
  return YearRange{start_year, end_year};
}

std::string YearRange::to_string() const {
  return start_year == end_year ? fmt::format("{}", start_year) : fmt::format("{}-{}", start_year, end_year);
}

std::string CameraCalibration::validate() const {
  if (camera_id.empty()) return "camera_id is empty";
  if (!(fx > 0.0) || !(fy > 0.0)) return fmt::format("focal lengths must be positive (fx={}, fy={})", fx, fy);
  if (image_width <= 0 || image_height <= 0) {
    return fmt::format("image size must be positive ({}x{})", image_width, image_height);
  }
  if (!rotation.allFinite() || !translation.allFinite()) return "extrinsics contain non-finite values";
  const double err = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-6) return fmt::format("rotation is not orthonormal (max deviation {:.3g})", err);
  return {};
}

}  // namespace dimseed
