#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dimseed/prediction.hpp"
#include "dimseed/response_parser.hpp"
#include "dimseed/types.hpp"

namespace dimseed {

using LabelMap = std::map<std::string, GroundTruthLabel>;

/// Parsed answer for one track, tagged with where it came from.
struct TrackOutcome {
  std::string track_id;
  ParsedOutcome outcome;
  PredictionSource source;
};

struct MetricsReport {
  std::array<double, 3> abs_err_lwh{};
  std::array<double, 3> rel_err_lwh{};
  double mean_iou = 0.0;
  double pct_predictions = 0.0;
  std::size_t n_samples = 0;
  std::map<std::string, MetricsReport> slices;
};

/// Predictions pass through; abstentions and parse failures receive the
/// per-dimension mean of this run's predicted dims and are marked imputed.
/// Throws NoDonorPredictions if nothing was predicted.
std::vector<DimPrediction> impute_abstentions(const std::vector<TrackOutcome>& outcomes);

/// Mean absolute and relative (label-denominated) errors, mean centered BEV
/// IoU, and the non-imputed fraction. Summation runs in track_id order so the
/// result is independent of input order. Throws EmptySet or MissingLabel.
MetricsReport compute_metrics(const std::vector<DimPrediction>& preds, const LabelMap& labels);

/// Returns the slice name for a sample or nullopt to leave it out.
using SliceKey = std::function<std::optional<std::string>(const DimPrediction&, const GroundTruthLabel&)>;

/// Groups predictions by `key` and stores compute_metrics of each group under
/// report.slices.
void add_slices(MetricsReport& report, const std::vector<DimPrediction>& preds, const LabelMap& labels,
                const SliceKey& key);

SliceKey slice_by_vehicle_type();
SliceKey slice_by_modification();
SliceKey slice_by_source();

enum class AbstentionScoring { incorrect, excluded };

struct TypeAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct VmmgrAccuracy {
  std::map<VehicleType, TypeAccuracy> per_type;
  TypeAccuracy overall;
  /// Samples skipped because their label lacks make, model or generation.
  std::size_t missing_truth = 0;
};

struct VmmgrOptions {
  MatchOptions match;
  AbstentionScoring abstentions = AbstentionScoring::incorrect;
};

/// Per ground-truth type make/model/generation accuracy.
VmmgrAccuracy vmmgr_accuracy(const std::vector<TrackOutcome>& outcomes, const LabelMap& labels,
                             const VmmgrOptions& options = {});

struct ModificationSplit {
  std::optional<MetricsReport> unmodified;
  std::optional<MetricsReport> modified;
  /// Unmodified share of the non-imputed predictions that carry a response.
  std::optional<double> pct_unmodified;
};

/// Partitions non-imputed predictions by modification_flags; imputed samples
/// and predictions without a response are left out. An empty side is absent.
ModificationSplit modification_split(const std::vector<DimPrediction>& preds, const LabelMap& labels);

struct LabelSuspect {
  std::string track_id;
  std::string dim_name;  // "length", "width" or "height"
  double pred_value = 0.0;
  double label_value = 0.0;
  double rel_deviation = 0.0;
};

inline constexpr double k_default_suspect_threshold = 0.10;

/// Dimensions where a non-imputed prediction of a correctly identified vehicle
/// (or one whose label carries no identity to check) deviates from its label
/// by more than rel_threshold, largest deviation first.
std::vector<LabelSuspect> flag_label_suspects(const std::vector<DimPrediction>& preds, const LabelMap& labels,
                                              double rel_threshold = k_default_suspect_threshold,
                                              const MatchOptions& match = {});

LabelMap labels_of(const std::vector<VehicleTrack>& tracks);

}  // namespace dimseed
