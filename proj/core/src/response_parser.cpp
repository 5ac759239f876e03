#include "dimseed/response_parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dimseed/errors.hpp"

namespace dimseed {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::size_t k_max_candidates = 64;
constexpr std::size_t k_fragment_preview = 120;

std::string preview(std::string_view text) {
  std::string out(text.substr(0, k_fragment_preview));
  if (text.size() > k_fragment_preview) out += "...";
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// End offset (exclusive) of the balanced object starting at `open`, skipping
// braces inside string literals.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

std::optional<json> first_object(std::string_view text) {
  std::size_t pos = 0;
  for (std::size_t attempts = 0; attempts < k_max_candidates; ++attempts) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string_view::npos) return std::nullopt;
    if (auto end = balanced_end(text, open)) {
      json obj = json::parse(text.substr(open, *end - open), nullptr, false);
      if (!obj.is_discarded() && obj.is_object()) return obj;
    }
    pos = open + 1;
  }
  return std::nullopt;
}

struct FieldError {
  std::string message;
};

const json* lookup(const json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

bool read_bool(const json& obj, std::string_view key) {
  const json* v = lookup(obj, key);
  if (v == nullptr) return false;
  if (v->is_boolean()) return v->get<bool>();
  if (v->is_string()) {
    const std::string s = lower(trim(v->get_ref<const std::string&>()));
    if (s == "true") return true;
    if (s == "false") return false;
  }
  throw FieldError{fmt::format("'{}' is not a boolean", key)};
}

std::optional<std::string> read_string(const json& obj, std::string_view key) {
  const json* v = lookup(obj, key);
  if (v == nullptr) return std::nullopt;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return std::to_string(v->get<long long>());
  throw FieldError{fmt::format("'{}' is not a string", key)};
}

std::optional<double> read_number(const json& obj, std::string_view key) {
  const json* v = lookup(obj, key);
  if (v == nullptr) return std::nullopt;
  double value = 0.0;
  if (v->is_number()) {
    value = v->get<double>();
  } else if (v->is_string()) {
    const std::string_view s = trim(v->get_ref<const std::string&>());
    if (lower(s) == "null") return std::nullopt;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw FieldError{fmt::format("'{}' is not a number", key)};
    }
  } else {
    throw FieldError{fmt::format("'{}' is not a number", key)};
  }
  if (!std::isfinite(value) || value <= 0.0 || value > k_max_dimension_m) {
    throw FieldError{fmt::format("'{}' = {} outside (0, {}] m", key, value, k_max_dimension_m)};
  }
  return value;
}

std::optional<Modification> read_modification(const json& obj, std::string_view key) {
  const auto s = read_string(obj, key);
  if (!s) return std::nullopt;
  const std::string v = lower(trim(*s));
  if (v == "increased") return Modification::increased;
  if (v == "decreased") return Modification::decreased;
  if (v.empty() || v == "null" || v == "none") return std::nullopt;
  throw FieldError{fmt::format("'{}' has unknown value '{}'", key, *s)};
}

std::optional<VehicleType> read_vehicle_type(const json& obj, std::string_view key) {
  const auto s = read_string(obj, key);
  if (!s) return std::nullopt;
  if (auto t = vehicle_type_from_label(*s)) return t;
  throw FieldError{fmt::format("'{}' has unknown value '{}'", key, *s)};
}

VlmResponse read_fields(const json& obj, const ResponseSchema& schema) {
  VlmResponse r;
  if (schema.has("make")) r.make = read_string(obj, "make");
  if (schema.has("model")) r.model = read_string(obj, "model");
  if (schema.has("generation_year_range")) {
    if (auto g = read_string(obj, "generation_year_range")) {
      try {
        r.generation_year_range = parse_year_range(*g);
      } catch (const InvalidYearRange& e) {
        throw FieldError{e.what()};
      }
    }
  }
  if (schema.has("vehicle_type")) r.vehicle_type = read_vehicle_type(obj, "vehicle_type");
  if (schema.has("size_class")) r.size_class = read_string(obj, "size_class");
  if (schema.has("configuration")) r.configuration = read_string(obj, "configuration");

  const auto l = read_number(obj, "length_m");
  const auto w = read_number(obj, "width_m");
  const auto h = read_number(obj, "height_m");
  if (l && w && h) r.dims = Dimensions{*l, *w, *h};

  if (schema.has("length_modification")) r.length_modification = read_modification(obj, "length_modification");
  if (schema.has("width_modification")) r.width_modification = read_modification(obj, "width_modification");
  if (schema.has("height_modification")) r.height_modification = read_modification(obj, "height_modification");
  return r;
}

template <typename T>
void put(ordered_json& out, std::string_view key, const std::optional<T>& value) {
  if (value) {
    out[std::string(key)] = *value;
  } else {
    out[std::string(key)] = nullptr;
  }
}

void put_modification(ordered_json& out, std::string_view key, const std::optional<Modification>& m) {
  if (m) {
    out[std::string(key)] = std::string(to_string(*m));
  } else {
    out[std::string(key)] = nullptr;
  }
}

}  // namespace

std::string_view to_string(Modification m) noexcept {
  return m == Modification::increased ? "increased" : "decreased";
}

std::string_view to_string(AbstentionReason reason) noexcept {
  switch (reason) {
    case AbstentionReason::occluded: return "occluded";
    case AbstentionReason::null_dims: return "null_dims";
    case AbstentionReason::no_input: return "no_input";
  }
  return "null_dims";
}

AbstentionReason parse_abstention_reason(std::string_view text) {
  for (auto r : {AbstentionReason::occluded, AbstentionReason::null_dims, AbstentionReason::no_input}) {
    if (text == to_string(r)) return r;
  }
  throw InvalidValue(fmt::format("unknown abstention reason '{}'", text));
}

ParsedOutcome parse_response(std::string_view raw_text, PromptVariant variant) noexcept {
  try {
    const auto obj = first_object(raw_text);
    if (!obj) return ParseFailure{fmt::format("no JSON object found in: {}", preview(raw_text))};

    const ResponseSchema& schema = response_schema(variant);
    try {
      if (schema.has("significantly_occluded") && read_bool(*obj, "significantly_occluded")) {
        return Abstention{AbstentionReason::occluded};
      }
      VlmResponse response = read_fields(*obj, schema);
      if (!response.dims) return Abstention{AbstentionReason::null_dims};
      return Prediction{std::move(response)};
    } catch (const FieldError& e) {
      return ParseFailure{fmt::format("{} in: {}", e.message, preview(obj->dump()))};
    }
  } catch (const std::exception& e) {
    return ParseFailure{fmt::format("parser error: {}", e.what())};
  } catch (...) {
    return ParseFailure{"parser error"};
  }
}

std::string serialize_response(const VlmResponse& r, PromptVariant variant) {
  ordered_json out = ordered_json::object();
  const std::optional<std::string> generation =
      r.generation_year_range ? std::optional<std::string>(r.generation_year_range->to_string()) : std::nullopt;
  const std::optional<std::string> vtype =
      r.vehicle_type ? std::optional<std::string>(std::string(to_string(*r.vehicle_type))) : std::nullopt;

  for (const auto& field : response_schema(variant).fields) {
    const std::string_view key = field.name;
    if (key == "significantly_occluded") {
      out[std::string(key)] = r.significantly_occluded;
    } else if (key == "make") {
      put(out, key, r.make);
    } else if (key == "model") {
      put(out, key, r.model);
    } else if (key == "generation_year_range") {
      put(out, key, generation);
    } else if (key == "vehicle_type") {
      put(out, key, vtype);
    } else if (key == "size_class") {
      put(out, key, r.size_class);
    } else if (key == "configuration") {
      put(out, key, r.configuration);
    } else if (key == "length_m") {
      put(out, key, r.dims ? std::optional<double>(r.dims->length_m) : std::nullopt);
    } else if (key == "width_m") {
      put(out, key, r.dims ? std::optional<double>(r.dims->width_m) : std::nullopt);
    } else if (key == "height_m") {
      put(out, key, r.dims ? std::optional<double>(r.dims->height_m) : std::nullopt);
    } else if (key == "length_modification") {
      put_modification(out, key, r.length_modification);
    } else if (key == "width_modification") {
      put_modification(out, key, r.width_modification);
    } else if (key == "height_modification") {
      put_modification(out, key, r.height_modification);
    }
  }
  return out.dump();
}

YearRange parse_year_range(std::string_view text) {
  const std::string_view s = trim(text);
  auto year = [&](std::string_view part) -> int {
    part = trim(part);
    int value = 0;
    const bool digits = part.size() == 4 && std::all_of(part.begin(), part.end(), [](char c) {
                          return std::isdigit(static_cast<unsigned char>(c));
                        });
    if (!digits) throw InvalidYearRange(fmt::format("invalid year range '{}'", text));
    std::from_chars(part.data(), part.data() + part.size(), value);
    return value;
  };

  constexpr std::string_view en_dash = "\xE2\x80\x93";
  std::size_t sep = s.find(en_dash);
  std::size_t sep_len = en_dash.size();
  if (sep == std::string_view::npos) {
    sep = s.find('-');
    sep_len = 1;
  }
  if (sep == std::string_view::npos) {
    const int y = year(s);
    return YearRange::make(y, y);
  }
  return YearRange::make(year(s.substr(0, sep)), year(s.substr(sep + sep_len)));
}

std::string normalize_name(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (uc < 0x80 && std::ispunct(uc)) continue;
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

void AliasTable::add(std::string_view canonical, std::string_view alias) {
  aliases_[normalize_name(alias)] = normalize_name(canonical);
}

std::string AliasTable::canonicalize(std::string_view name) const {
  std::string key = normalize_name(name);
  auto it = aliases_.find(key);
  return it == aliases_.end() ? key : it->second;
}

AliasTable AliasTable::from_json_text(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("alias table must be a JSON object");
  AliasTable table;
  for (const auto& [canonical, aliases] : doc.items()) {
    if (!aliases.is_array()) throw ConfigError(fmt::format("aliases for '{}' must be an array", canonical));
    for (const auto& a : aliases) table.add(canonical, a.get<std::string>());
  }
  return table;
}

AliasTable AliasTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open alias table '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

bool vmmgr_match(const VlmResponse& pred, const GroundTruthLabel& truth, const MatchOptions& options) {
  if (!truth.make || !truth.model || !truth.generation_range) {
    throw MissingTruth("label lacks make, model or generation");
  }
  if (!pred.make || !pred.model || !pred.generation_year_range) return false;

  auto canon = [&](const std::string& s) {
    return options.aliases != nullptr ? options.aliases->canonicalize(s) : normalize_name(s);
  };
  if (canon(*pred.make) != canon(*truth.make)) return false;
  if (canon(*pred.model) != canon(*truth.model)) return false;
  return options.generation == GenerationMatch::exact ? *pred.generation_year_range == *truth.generation_range
                                                      : pred.generation_year_range->overlaps(*truth.generation_range);
}

bool modification_flags(const VlmResponse& pred) noexcept {
  return pred.length_modification.has_value() || pred.width_modification.has_value() ||
         pred.height_modification.has_value();
}

}  // namespace dimseed
