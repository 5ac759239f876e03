#include "dimseed/artifact.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dimseed/baseline.hpp"
#include "dimseed/errors.hpp"

namespace dimseed {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string dump(const ordered_json& j) { return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace); }

// Dims-only prediction for the baseline, which has no prompt variant.
PromptVariant schema_variant(const PredictionSource& source) {
  return source.variant.value_or(PromptVariant::basic);
}

}  // namespace

std::string to_jsonl_line(const ArtifactRecord& record) {
  ordered_json j;
  j["track_id"] = record.track_id;
  j["variant"] = record.source.variant ? ordered_json(std::string(to_string(*record.source.variant))) : ordered_json();
  j["backend"] = record.source.backend;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Prediction>) {
          j["outcome"] = "prediction";
          j["response"] = ordered_json::parse(serialize_response(o.response, schema_variant(record.source)));
        } else if constexpr (std::is_same_v<T, Abstention>) {
          j["outcome"] = "abstention";
          j["reason"] = std::string(to_string(o.reason));
        } else {
          j["outcome"] = "parse_failure";
          j["detail"] = o.detail;
        }
      },
      record.outcome);
  ordered_json frames = ordered_json::array();
  for (const auto& f : record.frames) frames.push_back({{"timestamp", f.timestamp}, {"camera_id", f.camera_id}});
  j["frames"] = frames;
  j["raw_text"] = record.raw_text ? ordered_json(*record.raw_text) : ordered_json();
  return dump(j);
}

ArtifactRecord parse_artifact_line(std::string_view line) {
  const ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InvalidValue("artifact record is not a JSON object");
  ArtifactRecord r;
  try {
    r.track_id = j.at("track_id").get<std::string>();
    if (!j.at("variant").is_null()) r.source.variant = parse_prompt_variant(j["variant"].get<std::string>());
    r.source.backend = j.at("backend").get<std::string>();
    const std::string kind = j.at("outcome").get<std::string>();
    if (kind == "prediction") {
      const PromptVariant v = schema_variant(r.source);
      ParsedOutcome parsed = parse_response(dump(j.at("response")), v);
      if (!std::holds_alternative<Prediction>(parsed)) {
        throw InvalidValue(fmt::format("track '{}': stored prediction does not parse as one", r.track_id));
      }
      r.outcome = std::move(parsed);
    } else if (kind == "abstention") {
      r.outcome = Abstention{parse_abstention_reason(j.at("reason").get<std::string>())};
    } else if (kind == "parse_failure") {
      r.outcome = ParseFailure{j.at("detail").get<std::string>()};
    } else {
      throw InvalidValue(fmt::format("unknown outcome '{}'", kind));
    }
    if (auto it = j.find("frames"); it != j.end()) {
      for (const auto& f : *it) r.frames.push_back({f.at("timestamp").get<double>(), f.at("camera_id").get<std::string>()});
    }
    if (auto it = j.find("raw_text"); it != j.end() && it->is_string()) r.raw_text = it->get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidValue(fmt::format("malformed artifact record: {}", e.what()));
  }
  return r;
}

std::vector<ArtifactRecord> read_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open artifact '{}'", path.string()));
  std::vector<ArtifactRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_artifact_line(line));
    } catch (const InvalidValue& e) {
      throw InvalidValue(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

std::set<std::string> recover_artifact(const std::filesystem::path& path) {
  std::set<std::string> ids;
  if (!std::filesystem::exists(path)) return ids;
  std::string content;
  {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    content = buffer.str();
  }
  std::size_t good_end = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    const std::string_view line(content.data() + pos, nl - pos);
    try {
      ids.insert(parse_artifact_line(line).track_id);
    } catch (const InvalidValue&) {
      break;
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end != content.size()) std::filesystem::resize_file(path, good_end);
  return ids;
}

TrackOutcome to_track_outcome(const ArtifactRecord& record) {
  return TrackOutcome{record.track_id, record.outcome, record.source};
}

std::vector<TrackOutcome> to_track_outcomes(const std::vector<ArtifactRecord>& records) {
  std::vector<TrackOutcome> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(to_track_outcome(r));
  return out;
}

std::vector<ArtifactRecord> baseline_records(const std::vector<DimPrediction>& preds) {
  std::vector<ArtifactRecord> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    VlmResponse response;
    response.dims = p.dims;
    out.push_back(ArtifactRecord{p.track_id, p.source, Prediction{response}, {}, std::nullopt});
  }
  return out;
}

}  // namespace dimseed
