#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dimseed/evaluator.hpp"

namespace dimseed {

/// Named column of a comparison table (one run, backend or prompt variant).
using ReportColumn = std::pair<std::string, MetricsReport>;
using VmmgrColumn = std::pair<std::string, VmmgrAccuracy>;

/// Machine-readable report, slices nested under "slices".
std::string metrics_to_json(const MetricsReport& report, int indent = 2);
std::string vmmgr_to_json(const VmmgrAccuracy& accuracy, int indent = 2);
std::string suspects_to_json(const std::vector<LabelSuspect>& suspects, int indent = 2);
std::string modification_to_json(const ModificationSplit& split, int indent = 2);

/// Metric rows x run columns: abs/rel errors per dimension, IoU, prediction rate.
std::string metrics_markdown(const std::vector<ReportColumn>& columns);
std::string metrics_csv(const std::vector<ReportColumn>& columns);

/// Runs as rows; Sedan, SUV, Pickup Truck, Van, Hatchback and Total columns.
std::string vmmgr_markdown(const std::vector<VmmgrColumn>& rows);
std::string vmmgr_csv(const std::vector<VmmgrColumn>& rows);

std::string suspects_markdown(const std::vector<LabelSuspect>& suspects);

}  // namespace dimseed
