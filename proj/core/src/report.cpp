#include "dimseed/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

namespace dimseed {

using ordered_json = nlohmann::ordered_json;

namespace {

struct MetricRow {
  const char* title;
  const char* key;
  double (*get)(const MetricsReport&);
  bool percent;
};

const std::vector<MetricRow>& metric_rows() {
  static const std::vector<MetricRow> rows = {
      {"Absolute length error (meters)", "abs_length_m", [](const MetricsReport& r) { return r.abs_err_lwh[0]; }, false},
      {"Absolute width error (meters)", "abs_width_m", [](const MetricsReport& r) { return r.abs_err_lwh[1]; }, false},
      {"Absolute height error (meters)", "abs_height_m", [](const MetricsReport& r) { return r.abs_err_lwh[2]; }, false},
      {"Relative length error (proportion)", "rel_length", [](const MetricsReport& r) { return r.rel_err_lwh[0]; }, false},
      {"Relative width error (proportion)", "rel_width", [](const MetricsReport& r) { return r.rel_err_lwh[1]; }, false},
      {"Relative height error (proportion)", "rel_height", [](const MetricsReport& r) { return r.rel_err_lwh[2]; }, false},
      {"Intersection-over-union", "mean_iou", [](const MetricsReport& r) { return r.mean_iou; }, false},
      {"Percentage predictions", "pct_predictions", [](const MetricsReport& r) { return r.pct_predictions; }, true},
  };
  return rows;
}

std::string cell(double value, bool percent) {
  return percent ? fmt::format("{:.2f}%", 100.0 * value) : fmt::format("{:.4f}", value);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ordered_json metrics_json(const MetricsReport& r) {
  ordered_json j;
  j["n_samples"] = r.n_samples;
  j["abs_err_lwh"] = r.abs_err_lwh;
  j["rel_err_lwh"] = r.rel_err_lwh;
  j["mean_iou"] = r.mean_iou;
  j["pct_predictions"] = r.pct_predictions;
  if (!r.slices.empty()) {
    ordered_json s = ordered_json::object();
    for (const auto& [name, sub] : r.slices) s[name] = metrics_json(sub);
    j["slices"] = s;
  }
  return j;
}

std::string accuracy_cell(const VmmgrAccuracy& acc, VehicleType type) {
  auto it = acc.per_type.find(type);
  if (it == acc.per_type.end() || it->second.total == 0) return "-";
  return fmt::format("{:.1f}%", 100.0 * it->second.accuracy());
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report, int indent) { return metrics_json(report).dump(indent); }

std::string vmmgr_to_json(const VmmgrAccuracy& acc, int indent) {
  ordered_json j;
  ordered_json per_type = ordered_json::object();
  for (const auto& [type, a] : acc.per_type) {
    per_type[std::string(to_string(type))] = {{"correct", a.correct}, {"total", a.total}, {"accuracy", a.accuracy()}};
  }
  j["per_type"] = per_type;
  j["overall"] = {{"correct", acc.overall.correct}, {"total", acc.overall.total}, {"accuracy", acc.overall.accuracy()}};
  j["missing_truth"] = acc.missing_truth;
  return j.dump(indent);
}

std::string suspects_to_json(const std::vector<LabelSuspect>& suspects, int indent) {
  ordered_json j = ordered_json::array();
  for (const auto& s : suspects) {
    j.push_back({{"track_id", s.track_id},
                 {"dim", s.dim_name},
                 {"pred_m", s.pred_value},
                 {"label_m", s.label_value},
                 {"rel_deviation", s.rel_deviation}});
  }
  return j.dump(indent, ' ', false, ordered_json::error_handler_t::replace);
}

std::string modification_to_json(const ModificationSplit& split, int indent) {
  ordered_json j;
  j["pct_unmodified"] = split.pct_unmodified ? ordered_json(*split.pct_unmodified) : ordered_json();
  j["unmodified"] = split.unmodified ? metrics_json(*split.unmodified) : ordered_json();
  j["modified"] = split.modified ? metrics_json(*split.modified) : ordered_json();
  return j.dump(indent);
}

std::string metrics_markdown(const std::vector<ReportColumn>& columns) {
  std::string out = "| Metric |";
  std::string rule = "|---|";
  for (const auto& [name, _] : columns) {
    out += fmt::format(" {} |", name);
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  for (const auto& row : metric_rows()) {
    out += fmt::format("| {} |", row.title);
    for (const auto& [_, report] : columns) out += fmt::format(" {} |", cell(row.get(report), row.percent));
    out += "\n";
  }
  out += "| Samples |";
  for (const auto& [_, report] : columns) out += fmt::format(" {} |", report.n_samples);
  return out + "\n";
}

std::string metrics_csv(const std::vector<ReportColumn>& columns) {
  std::string out = "metric";
  for (const auto& [name, _] : columns) out += "," + csv_field(name);
  out += "\n";
  for (const auto& row : metric_rows()) {
    out += row.key;
    for (const auto& [_, report] : columns) out += fmt::format(",{:.17g}", row.get(report));
    out += "\n";
  }
  out += "n_samples";
  for (const auto& [_, report] : columns) out += fmt::format(",{}", report.n_samples);
  return out + "\n";
}

std::string vmmgr_markdown(const std::vector<VmmgrColumn>& rows) {
  std::string out = "| Model |";
  std::string rule = "|---|";
  for (auto type : k_main_vehicle_types) {
    out += fmt::format(" {} |", display_name(type));
    rule += "---:|";
  }
  out += " Total |\n" + rule + "---:|\n";
  for (const auto& [name, acc] : rows) {
    out += fmt::format("| {} |", name);
    for (auto type : k_main_vehicle_types) out += fmt::format(" {} |", accuracy_cell(acc, type));
    out += fmt::format(" {} |\n",
                       acc.overall.total == 0 ? std::string("-") : fmt::format("{:.1f}%", 100.0 * acc.overall.accuracy()));
  }
  return out;
}

std::string vmmgr_csv(const std::vector<VmmgrColumn>& rows) {
  std::string out = "model";
  for (auto type : k_main_vehicle_types) out += fmt::format(",{}", to_string(type));
  out += ",total\n";
  for (const auto& [name, acc] : rows) {
    out += csv_field(name);
    for (auto type : k_main_vehicle_types) {
      auto it = acc.per_type.find(type);
      out += it == acc.per_type.end() || it->second.total == 0 ? "," : fmt::format(",{:.17g}", it->second.accuracy());
    }
    out += fmt::format(",{:.17g}\n", acc.overall.accuracy());
  }
  return out;
}

std::string suspects_markdown(const std::vector<LabelSuspect>& suspects) {
  std::string out = "| Track | Dimension | Predicted (m) | Label (m) | Relative deviation |\n|---|---|---:|---:|---:|\n";
  for (const auto& s : suspects) {
    out += fmt::format("| {} | {} | {:.3f} | {:.3f} | {:.4f} |\n", s.track_id, s.dim_name, s.pred_value, s.label_value,
                       s.rel_deviation);
  }
  return out;
}

}  // namespace dimseed
