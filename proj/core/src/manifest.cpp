#include "dimseed/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace dimseed {

using json = nlohmann::json;

namespace {

std::string_view kind_name(ManifestIssueKind kind) {
  switch (kind) {
    case ManifestIssueKind::malformed_line: return "MalformedLine";
    case ManifestIssueKind::unknown_camera: return "UnknownCamera";
    case ManifestIssueKind::non_monotone_timestamps: return "NonMonotoneTimestamps";
    case ManifestIssueKind::empty_track: return "EmptyTrack";
    case ManifestIssueKind::duplicate_track: return "DuplicateTrack";
    case ManifestIssueKind::invalid_calibration: return "InvalidCalibration";
  }
  return "Unknown";
}

std::string summarize(const std::vector<ManifestIssue>& issues) {
  std::string msg = fmt::format("manifest rejected with {} issue(s)", issues.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(issues.size(), 5); ++i) {
    msg += "\n  " + issues[i].describe();
  }
  if (issues.size() > 5) msg += fmt::format("\n  ... and {} more", issues.size() - 5);
  return msg;
}

double number(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw InvalidValue(fmt::format("field '{}' must be a number", key));
  return v.get<double>();
}

template <std::size_t N>
std::array<double, N> numbers(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != N) throw InvalidValue(fmt::format("field '{}' must be an array of {} numbers", key, N));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) throw InvalidValue(fmt::format("field '{}' must contain numbers", key));
    out[i] = v[i].get<double>();
  }
  return out;
}

std::string id_string(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InvalidValue(fmt::format("field '{}' must be a string", key));
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InvalidValue(fmt::format("field '{}' must be a string or null", key));
  return it->get<std::string>();
}

CameraCalibration parse_calibration(const json& obj) {
  CameraCalibration cal;
  cal.camera_id = id_string(obj, "camera_id");
  cal.fx = number(obj, "fx");
  cal.fy = number(obj, "fy");
  cal.cx = number(obj, "cx");
  cal.cy = number(obj, "cy");
  const auto r = numbers<9>(obj, "rotation");
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) cal.rotation(row, col) = r[static_cast<std::size_t>(row * 3 + col)];
  const auto t = numbers<3>(obj, "translation");
  cal.translation = Eigen::Vector3d(t[0], t[1], t[2]);
  cal.image_width = obj.at("image_width").get<int>();
  cal.image_height = obj.at("image_height").get<int>();
  return cal;
}

GroundTruthLabel parse_label(const json& obj) {
  GroundTruthLabel label;
  const auto d = numbers<3>(obj, "dims");
  label.dims = Dimensions::make(d[0], d[1], d[2]);
  label.vehicle_type = parse_vehicle_type(obj.at("vehicle_type").get<std::string>());
  label.make = optional_string(obj, "make");
  label.model = optional_string(obj, "model");
  if (auto it = obj.find("generation_range"); it != obj.end() && !it->is_null()) {
    const auto g = numbers<2>(obj, "generation_range");
    label.generation_range = YearRange::make(static_cast<int>(g[0]), static_cast<int>(g[1]));
  }
  if (auto it = obj.find("modified"); it != obj.end() && !it->is_null()) {
    label.modified_truth = it->get<bool>();
  }
  return label;
}

Observation parse_observation(const json& obj) {
  Observation o;
  o.timestamp = number(obj, "timestamp");
  o.camera_id = id_string(obj, "camera_id");
  const auto c = numbers<3>(obj, "center");
  o.box.center = Eigen::Vector3d(c[0], c[1], c[2]);
  const auto d = numbers<3>(obj, "dims");
  o.box.dims = Dimensions::make(d[0], d[1], d[2]);
  o.box.heading = number(obj, "heading");
  if (!(o.box.heading >= -std::numbers::pi && o.box.heading < std::numbers::pi)) {
    throw InvalidValue(fmt::format("heading {} outside [-pi, pi)", o.box.heading));
  }
  o.crop_ref = obj.at("crop").get<std::string>();
  return o;
}

}  // namespace

std::string ManifestIssue::describe() const {
  std::string out = fmt::format("line {}: {}", line_no, kind_name(kind));
  if (!track_id.empty()) out += fmt::format(" track={}", track_id);
  if (!camera_id.empty()) out += fmt::format(" camera={}", camera_id);
  if (!detail.empty()) out += ": " + detail;
  return out;
}

ManifestError::ManifestError(std::vector<ManifestIssue> issues)
    : Error(summarize(issues)), issues_(std::move(issues)) {}

std::filesystem::path Manifest::resolve_crop(const std::string& crop_ref) const {
  std::filesystem::path p(crop_ref);
  return p.is_absolute() ? p : base_dir / p;
}

const VehicleTrack* Manifest::find_track(const std::string& track_id) const {
  auto it = std::lower_bound(tracks.begin(), tracks.end(), track_id,
                             [](const VehicleTrack& t, const std::string& id) { return t.track_id < id; });
  return (it != tracks.end() && it->track_id == track_id) ? &*it : nullptr;
}

Manifest parse_manifest(std::string_view text, std::filesystem::path base_dir) {
  Manifest manifest;
  manifest.base_dir = std::move(base_dir);
  std::vector<ManifestIssue> issues;
  std::set<std::string> seen_tracks;
  bool seen_track_line = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }

    const json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      issues.push_back({ManifestIssueKind::malformed_line, line_no, {}, {}, "not a JSON object"});
      continue;
    }
    const std::string kind = obj.value("kind", std::string{});
    try {
      if (kind == "calibration") {
        if (seen_track_line) {
          issues.push_back({ManifestIssueKind::malformed_line, line_no, {}, {},
                            "calibration lines must precede track lines"});
          continue;
        }
        CameraCalibration cal = parse_calibration(obj);
        if (auto problem = cal.validate(); !problem.empty()) {
          issues.push_back({ManifestIssueKind::invalid_calibration, line_no, {}, cal.camera_id, problem});
          continue;
        }
        const std::string id = cal.camera_id;
        if (!manifest.calibrations.emplace(id, std::move(cal)).second) {
          issues.push_back({ManifestIssueKind::invalid_calibration, line_no, {}, id, "duplicate camera_id"});
        }
      } else if (kind == "track") {
        seen_track_line = true;
        VehicleTrack track;
        track.track_id = id_string(obj, "track_id");
        track.min_range_m = number(obj, "min_range_m");
        if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) track.label = parse_label(*it);
        const auto& observations = obj.at("observations");
        if (!observations.is_array()) throw InvalidValue("observations must be an array");
        for (const auto& o : observations) track.observations.push_back(parse_observation(o));

        if (!seen_tracks.insert(track.track_id).second) {
          issues.push_back({ManifestIssueKind::duplicate_track, line_no, track.track_id, {}, {}});
          continue;
        }
        if (track.observations.empty()) {
          issues.push_back({ManifestIssueKind::empty_track, line_no, track.track_id, {}, {}});
          continue;
        }
        bool ok = true;
        for (std::size_t i = 1; i < track.observations.size(); ++i) {
          if (track.observations[i].timestamp < track.observations[i - 1].timestamp) {
            issues.push_back({ManifestIssueKind::non_monotone_timestamps, line_no, track.track_id, {},
                              fmt::format("observation {} goes back in time", i)});
            ok = false;
            break;
          }
        }
        std::set<std::string> reported;
        for (const auto& o : track.observations) {
          if (!manifest.calibrations.contains(o.camera_id) && reported.insert(o.camera_id).second) {
            issues.push_back({ManifestIssueKind::unknown_camera, line_no, track.track_id, o.camera_id, {}});
            ok = false;
          }
        }
        if (ok) manifest.tracks.push_back(std::move(track));
      } else {
        issues.push_back({ManifestIssueKind::malformed_line, line_no, {}, {},
                          kind.empty() ? "missing 'kind'" : fmt::format("unknown kind '{}'", kind)});
      }
    } catch (const std::exception& e) {
      issues.push_back({ManifestIssueKind::malformed_line, line_no, {}, {}, e.what()});
    }
    if (end == text.size()) break;
  }

  if (!issues.empty()) throw ManifestError(std::move(issues));
  std::sort(manifest.tracks.begin(), manifest.tracks.end(),
            [](const VehicleTrack& a, const VehicleTrack& b) { return a.track_id < b.track_id; });
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open manifest '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

std::vector<VehicleTrack> filter_by_range(const std::vector<VehicleTrack>& tracks, double max_range_m) {
  if (!(max_range_m > 0.0)) throw InvalidValue(fmt::format("range filter must be positive, got {}", max_range_m));
  std::vector<VehicleTrack> out;
  std::copy_if(tracks.begin(), tracks.end(), std::back_inserter(out),
               [&](const VehicleTrack& t) { return t.min_range_m <= max_range_m; });
  return out;
}

}  // namespace dimseed
