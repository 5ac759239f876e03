#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dimseed/prediction.hpp"
#include "dimseed/types.hpp"

namespace dimseed {

struct SizeClassEntry {
  std::string size_class;
  Dimensions dims;
  std::string source;
};

/// Representative dimensions per market size class, for each main type.
struct SizeClassTable {
  std::map<VehicleType, std::vector<SizeClassEntry>> entries;

  /// Throws ConfigError unless every main type has at least one entry.
  void validate() const;

  static SizeClassTable from_json_text(std::string_view text);
  static SizeClassTable load(const std::filesystem::path& path);
};

/// Per-dimension mean of the type's size-class entries. Throws UnknownType for
/// VehicleType::other or a type missing from the table.
Dimensions baseline_dims(VehicleType type, const SizeClassTable& table);

/// Per-dimension mean of the baseline outputs emitted for main-type samples.
/// Throws EmptyPredictionSet for an empty input.
Dimensions fallback_dims(std::span<const Dimensions> main_type_outputs);

/// Oracle baseline: reads each track's ground-truth type and emits its table
/// mean; `other` receives the mean of this run's main-type outputs. Never
/// abstains. Throws MissingLabel for unlabeled tracks.
std::vector<DimPrediction> run_baseline(const std::vector<VehicleTrack>& tracks, const SizeClassTable& table);

inline constexpr std::string_view k_baseline_source = "baseline";

}  // namespace dimseed
