#include "dimseed/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dimseed/baseline.hpp"
#include "dimseed/errors.hpp"
#include "dimseed/geometry.hpp"

namespace dimseed {

namespace {

constexpr std::array<const char*, 3> k_dim_names = {"length", "width", "height"};

struct LabeledPair {
  const DimPrediction* pred;
  const GroundTruthLabel* label;
};

// Pairs sorted by track_id (ties keep input order) for a fixed reduction order.
std::vector<LabeledPair> pair_with_labels(const std::vector<DimPrediction>& preds, const LabelMap& labels) {
  std::vector<LabeledPair> pairs;
  pairs.reserve(preds.size());
  for (const auto& p : preds) {
    auto it = labels.find(p.track_id);
    if (it == labels.end()) throw MissingLabel(p.track_id);
    pairs.push_back({&p, &it->second});
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const LabeledPair& a, const LabeledPair& b) { return a.pred->track_id < b.pred->track_id; });
  return pairs;
}

bool identity_verified(const DimPrediction& p, const GroundTruthLabel& label, const MatchOptions& match) {
  const bool truth_complete = label.make && label.model && label.generation_range;
  if (!truth_complete) return true;
  return p.response.has_value() && vmmgr_match(*p.response, label, match);
}

}  // namespace

std::string PredictionSource::label() const {
  const std::string_view v = variant ? to_string(*variant) : k_baseline_source;
  return backend.empty() || backend == v ? std::string(v) : fmt::format("{}@{}", v, backend);
}

std::vector<DimPrediction> impute_abstentions(const std::vector<TrackOutcome>& outcomes) {
  double sum_l = 0.0, sum_w = 0.0, sum_h = 0.0;
  std::size_t donors = 0;
  for (const auto& o : outcomes) {
    if (const auto* p = std::get_if<Prediction>(&o.outcome)) {
      sum_l += p->response.dims->length_m;
      sum_w += p->response.dims->width_m;
      sum_h += p->response.dims->height_m;
      ++donors;
    }
  }
  if (donors == 0) throw NoDonorPredictions("no predictions to impute abstentions from");
  const auto n = static_cast<double>(donors);
  const Dimensions donor_mean{sum_l / n, sum_w / n, sum_h / n};

  std::vector<DimPrediction> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    DimPrediction d;
    d.track_id = o.track_id;
    d.source = o.source;
    if (const auto* p = std::get_if<Prediction>(&o.outcome)) {
      d.dims = *p->response.dims;
      d.response = p->response;
    } else {
      d.dims = donor_mean;
      d.imputed = true;
    }
    out.push_back(std::move(d));
  }
  return out;
}

MetricsReport compute_metrics(const std::vector<DimPrediction>& preds, const LabelMap& labels) {
  if (preds.empty()) throw EmptySet("cannot compute metrics over zero samples");
  const auto pairs = pair_with_labels(preds, labels);

  MetricsReport r;
  std::size_t predicted = 0;
  double iou_sum = 0.0;
  for (const auto& [pred, label] : pairs) {
    const auto p = pred->dims.as_array();
    const auto t = label->dims.as_array();
    for (std::size_t k = 0; k < 3; ++k) {
      const double err = std::abs(p[k] - t[k]);
      r.abs_err_lwh[k] += err;
      r.rel_err_lwh[k] += err / t[k];
    }
    iou_sum += bev_iou_centered(pred->dims, label->dims);
    if (!pred->imputed) ++predicted;
  }
  const auto n = static_cast<double>(pairs.size());
  for (std::size_t k = 0; k < 3; ++k) {
    r.abs_err_lwh[k] /= n;
    r.rel_err_lwh[k] /= n;
  }
  r.mean_iou = iou_sum / n;
  r.pct_predictions = static_cast<double>(predicted) / n;
  r.n_samples = pairs.size();
  return r;
}

void add_slices(MetricsReport& report, const std::vector<DimPrediction>& preds, const LabelMap& labels,
                const SliceKey& key) {
  std::map<std::string, std::vector<DimPrediction>> groups;
  for (const auto& p : preds) {
    auto it = labels.find(p.track_id);
    if (it == labels.end()) throw MissingLabel(p.track_id);
    if (auto name = key(p, it->second)) groups[*name].push_back(p);
  }
  for (auto& [name, group] : groups) report.slices[name] = compute_metrics(group, labels);
}

SliceKey slice_by_vehicle_type() {
  return [](const DimPrediction&, const GroundTruthLabel& label) -> std::optional<std::string> {
    return std::string(to_string(label.vehicle_type));
  };
}

SliceKey slice_by_modification() {
  return [](const DimPrediction& p, const GroundTruthLabel&) -> std::optional<std::string> {
    if (p.imputed || !p.response) return std::nullopt;
    return modification_flags(*p.response) ? "modified" : "unmodified";
  };
}

SliceKey slice_by_source() {
  return [](const DimPrediction& p, const GroundTruthLabel&) -> std::optional<std::string> {
    return p.source.label();
  };
}

VmmgrAccuracy vmmgr_accuracy(const std::vector<TrackOutcome>& outcomes, const LabelMap& labels,
                             const VmmgrOptions& options) {
  VmmgrAccuracy acc;
  for (const auto& o : outcomes) {
    auto it = labels.find(o.track_id);
    if (it == labels.end()) {
      ++acc.missing_truth;
      continue;
    }
    const GroundTruthLabel& label = it->second;
    if (!label.make || !label.model || !label.generation_range) {
      ++acc.missing_truth;
      continue;
    }
    const auto* p = std::get_if<Prediction>(&o.outcome);
    if (p == nullptr && options.abstentions == AbstentionScoring::excluded) continue;

    const bool correct = p != nullptr && vmmgr_match(p->response, label, options.match);
    auto& slot = acc.per_type[label.vehicle_type];
    ++slot.total;
    ++acc.overall.total;
    if (correct) {
      ++slot.correct;
      ++acc.overall.correct;
    }
  }
  return acc;
}

ModificationSplit modification_split(const std::vector<DimPrediction>& preds, const LabelMap& labels) {
  std::vector<DimPrediction> unmodified;
  std::vector<DimPrediction> modified;
  for (const auto& p : preds) {
    if (p.imputed || !p.response) continue;
    (modification_flags(*p.response) ? modified : unmodified).push_back(p);
  }
  ModificationSplit split;
  const std::size_t total = unmodified.size() + modified.size();
  if (total == 0) return split;
  split.pct_unmodified = static_cast<double>(unmodified.size()) / static_cast<double>(total);
  if (!unmodified.empty()) split.unmodified = compute_metrics(unmodified, labels);
  if (!modified.empty()) split.modified = compute_metrics(modified, labels);
  return split;
}

std::vector<LabelSuspect> flag_label_suspects(const std::vector<DimPrediction>& preds, const LabelMap& labels,
                                              double rel_threshold, const MatchOptions& match) {
  if (!(rel_threshold > 0.0)) throw InvalidValue(fmt::format("threshold must be positive, got {}", rel_threshold));
  std::vector<LabelSuspect> flags;
  for (const auto& [pred, label] : pair_with_labels(preds, labels)) {
    if (pred->imputed || !identity_verified(*pred, *label, match)) continue;
    const auto p = pred->dims.as_array();
    const auto t = label->dims.as_array();
    for (std::size_t k = 0; k < 3; ++k) {
      const double dev = std::abs(p[k] - t[k]) / t[k];
      if (dev > rel_threshold) flags.push_back({pred->track_id, k_dim_names[k], p[k], t[k], dev});
    }
  }
  std::stable_sort(flags.begin(), flags.end(),
                   [](const LabelSuspect& a, const LabelSuspect& b) { return a.rel_deviation > b.rel_deviation; });
  return flags;
}

LabelMap labels_of(const std::vector<VehicleTrack>& tracks) {
  LabelMap out;
  for (const auto& t : tracks) {
    if (t.label) out.emplace(t.track_id, *t.label);
  }
  return out;
}

}  // namespace dimseed
