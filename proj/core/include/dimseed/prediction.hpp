#pragma once

#include <optional>
#include <string>

#include "dimseed/promptkit.hpp"
#include "dimseed/response_parser.hpp"
#include "dimseed/types.hpp"

namespace dimseed {

/// Where a dimension estimate came from. An empty variant means the oracle
/// baseline.
struct PredictionSource {
  std::optional<PromptVariant> variant;
  std::string backend;

  std::string label() const;
  friend bool operator==(const PredictionSource&, const PredictionSource&) = default;
};

struct DimPrediction {
  std::string track_id;
  Dimensions dims;
  bool imputed = false;
  PredictionSource source;
  /// The parsed answer behind a non-imputed VLM prediction.
  std::optional<VlmResponse> response;
};

}  // namespace dimseed
