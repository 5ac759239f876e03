#pragma once

#include <array>
#include <string>

#include <Eigen/Core>

#include "dimseed/types.hpp"

namespace dimseed {

struct PixelBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;
};

struct ProjectedFootprint {
  std::string camera_id;
  int visible_corner_count = 0;
  PixelBox pixel_bbox;  // clipped to the image
  double area_px = 0.0;
};

/// Corners nearer than this (camera-frame depth, meters) are dropped.
inline constexpr double k_near_plane_m = 0.1;

/// Eight corners of a yaw-rotated box in the vehicle frame. Bit 0 of the index
/// selects +/- length, bit 1 +/- width, bit 2 +/- height.
std::array<Eigen::Vector3d, 8> box_corners(const Eigen::Vector3d& center, const Dimensions& dims, double heading);

/// Axis-aligned pixel bounds of the box's projected corners, clipped to the
/// image. A box fully behind the camera yields a zero-area footprint.
ProjectedFootprint projected_area(const Box3d& box, const CameraCalibration& calibration);

/// IoU of co-centered, axis-aligned overhead rectangles (length x width).
double bev_iou_centered(const Dimensions& a, const Dimensions& b);

}  // namespace dimseed
