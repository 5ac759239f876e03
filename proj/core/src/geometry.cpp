#include "dimseed/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dimseed/errors.hpp"

namespace dimseed {

namespace {

void require_positive(const Dimensions& dims) {
  if (!dims.valid()) {
    throw NonPositiveDims(fmt::format("dimensions must be positive, got ({}, {}, {})", dims.length_m, dims.width_m,
                                      dims.height_m));
  }
}

}  // namespace

std::array<Eigen::Vector3d, 8> box_corners(const Eigen::Vector3d& center, const Dimensions& dims, double heading) {
  require_positive(dims);
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const Eigen::Vector3d half(dims.length_m / 2.0, dims.width_m / 2.0, dims.height_m / 2.0);

  std::array<Eigen::Vector3d, 8> corners;
  for (int i = 0; i < 8; ++i) {
    const double dx = (i & 1) ? half.x() : -half.x();
    const double dy = (i & 2) ? half.y() : -half.y();
    const double dz = (i & 4) ? half.z() : -half.z();
    corners[static_cast<std::size_t>(i)] = center + Eigen::Vector3d(c * dx - s * dy, s * dx + c * dy, dz);
  }
  return corners;
}

ProjectedFootprint projected_area(const Box3d& box, const CameraCalibration& calibration) {
  ProjectedFootprint fp;
  fp.camera_id = calibration.camera_id;

  double u_min = std::numeric_limits<double>::infinity();
  double v_min = std::numeric_limits<double>::infinity();
  double u_max = -std::numeric_limits<double>::infinity();
  double v_max = -std::numeric_limits<double>::infinity();

  for (const auto& corner : box_corners(box.center, box.dims, box.heading)) {
    const Eigen::Vector3d p = calibration.rotation * corner + calibration.translation;
    if (p.z() <= k_near_plane_m) continue;
    const double u = calibration.fx * p.x() / p.z() + calibration.cx;
    const double v = calibration.fy * p.y() / p.z() + calibration.cy;
    u_min = std::min(u_min, u);
    u_max = std::max(u_max, u);
    v_min = std::min(v_min, v);
    v_max = std::max(v_max, v);
    ++fp.visible_corner_count;
  }
  if (fp.visible_corner_count == 0) return fp;

  const double w = calibration.image_width;
  const double h = calibration.image_height;
  fp.pixel_bbox = PixelBox{std::clamp(u_min, 0.0, w), std::clamp(v_min, 0.0, h), std::clamp(u_max, 0.0, w),
                           std::clamp(v_max, 0.0, h)};
  fp.area_px = std::max(0.0, fp.pixel_bbox.u_max - fp.pixel_bbox.u_min) *
               std::max(0.0, fp.pixel_bbox.v_max - fp.pixel_bbox.v_min);
  return fp;
}

double bev_iou_centered(const Dimensions& a, const Dimensions& b) {
  require_positive(a);
  require_positive(b);
  const double inter = std::min(a.length_m, b.length_m) * std::min(a.width_m, b.width_m);
  const double uni = a.length_m * a.width_m + b.length_m * b.width_m - inter;
  return inter / uni;
}

}  // namespace dimseed
