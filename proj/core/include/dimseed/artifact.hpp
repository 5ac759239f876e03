#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dimseed/evaluator.hpp"
#include "dimseed/prediction.hpp"
#include "dimseed/response_parser.hpp"

namespace dimseed {

struct FrameRef {
  double timestamp = 0.0;
  std::string camera_id;
  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

/// One line of an inference artifact (JSONL, one record per track).
struct ArtifactRecord {
  std::string track_id;
  PredictionSource source;
  ParsedOutcome outcome;
  std::vector<FrameRef> frames;
  std::optional<std::string> raw_text;
};

std::string to_jsonl_line(const ArtifactRecord& record);
/// Throws InvalidValue on malformed records.
ArtifactRecord parse_artifact_line(std::string_view line);

/// Reads every record; throws InvalidValue naming the bad line.
std::vector<ArtifactRecord> read_artifact(const std::filesystem::path& path);

/// Track ids already written. A torn final line left by an interrupted run is
/// cut off so appends start on a clean record boundary.
std::set<std::string> recover_artifact(const std::filesystem::path& path);

TrackOutcome to_track_outcome(const ArtifactRecord& record);
std::vector<TrackOutcome> to_track_outcomes(const std::vector<ArtifactRecord>& records);

/// Baseline predictions as artifact records (dims-only predictions).
std::vector<ArtifactRecord> baseline_records(const std::vector<DimPrediction>& preds);

}  // namespace dimseed
