#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of these call into the code under test except for plain data
// types.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "dimseed/evaluator.hpp"
#include "dimseed/response_parser.hpp"
#include "dimseed/types.hpp"

namespace dimseed::testing {

/// Centered footprint IoU by counting cells of an n x n grid spanning the
/// larger footprint.
double raster_iou(double la, double wa, double lb, double wb, int n = 512);

/// Projected bbox area from explicit per-corner arithmetic (no Eigen).
double projected_area_oracle(const Box3d& box, const CameraCalibration& cal);

/// Camera with the largest oracle area, smallest id on ties; empty when no
/// camera sees the box.
std::string best_camera_oracle(const Box3d& box, const std::map<std::string, CameraCalibration>& cals,
                               const std::vector<std::string>& observing);

struct NaiveMetrics {
  double abs[3] = {0, 0, 0};
  double rel[3] = {0, 0, 0};
  double iou = 0;
  double pct = 0;
};

/// Textbook loop in input order, long double accumulation.
NaiveMetrics naive_metrics(const std::vector<DimPrediction>& preds, const LabelMap& labels);

/// Camera looking horizontally along world yaw `yaw` from `position`, with
/// z-forward, y-down optical axes.
CameraCalibration look_along(const std::string& id, double yaw, const Eigen::Vector3d& position, double f = 500.0,
                             int width = 640, int height = 480);

Dimensions random_dims(std::mt19937_64& rng);

/// Well-formed, non-occluded response with every dimension set; only fields
/// in the variant's schema are populated.
VlmResponse random_response(std::mt19937_64& rng, PromptVariant variant);

/// Random structural damage: truncation, byte flips, splices, duplicated
/// braces, or plain garbage.
std::string mutate(std::mt19937_64& rng, const std::string& text);

}  // namespace dimseed::testing
