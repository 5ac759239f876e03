#include "dimseed/baseline.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dimseed/errors.hpp"

namespace dimseed {

using json = nlohmann::json;

namespace {

Dimensions mean_of(std::span<const Dimensions> dims) {
  double l = 0.0, w = 0.0, h = 0.0;
  for (const auto& d : dims) {
    l += d.length_m;
    w += d.width_m;
    h += d.height_m;
  }
  const auto n = static_cast<double>(dims.size());
  return Dimensions{l / n, w / n, h / n};
}

}  // namespace

void SizeClassTable::validate() const {
  for (auto type : k_main_vehicle_types) {
    auto it = entries.find(type);
    if (it == entries.end() || it->second.empty()) {
      throw ConfigError(fmt::format("size-class table has no entries for '{}'", to_string(type)));
    }
    for (const auto& e : it->second) {
      if (!e.dims.valid()) {
        throw ConfigError(fmt::format("size-class '{}' for '{}' has non-positive dims", e.size_class, to_string(type)));
      }
    }
  }
}

SizeClassTable SizeClassTable::from_json_text(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("size-class table must be a JSON object");
  SizeClassTable table;
  try {
    for (const auto& [type_name, list] : doc.items()) {
      if (type_name.starts_with("_")) continue;  // comment keys
      const VehicleType type = parse_vehicle_type(type_name);
      if (type == VehicleType::other) throw ConfigError("size-class table must not list 'other'");
      for (const auto& item : list) {
        const auto& d = item.at("dims");
        if (!d.is_array() || d.size() != 3) throw ConfigError("size-class dims must be [l, w, h]");
        table.entries[type].push_back(SizeClassEntry{
            item.at("class").get<std::string>(),
            Dimensions{d[0].get<double>(), d[1].get<double>(), d[2].get<double>()},
            item.value("source", std::string{}),
        });
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("size-class table: {}", e.what()));
  } catch (const InvalidValue& e) {
    throw ConfigError(fmt::format("size-class table: {}", e.what()));
  }
  table.validate();
  return table;
}

SizeClassTable SizeClassTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open size-class table '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

Dimensions baseline_dims(VehicleType type, const SizeClassTable& table) {
  if (type == VehicleType::other) throw UnknownType("baseline has no table entry for 'other'; use fallback_dims");
  auto it = table.entries.find(type);
  if (it == table.entries.end() || it->second.empty()) {
    throw UnknownType(fmt::format("size-class table has no entries for '{}'", to_string(type)));
  }
  std::vector<Dimensions> dims;
  for (const auto& e : it->second) dims.push_back(e.dims);
  return mean_of(dims);
}

Dimensions fallback_dims(std::span<const Dimensions> main_type_outputs) {
  if (main_type_outputs.empty()) throw EmptyPredictionSet("fallback needs at least one main-type prediction");
  return mean_of(main_type_outputs);
}

std::vector<DimPrediction> run_baseline(const std::vector<VehicleTrack>& tracks, const SizeClassTable& table) {
  std::map<VehicleType, Dimensions> per_type;
  for (auto type : k_main_vehicle_types) {
    if (table.entries.contains(type)) per_type[type] = baseline_dims(type, table);
  }

  std::vector<DimPrediction> out;
  std::vector<Dimensions> main_outputs;
  std::vector<std::size_t> pending_other;
  for (const auto& track : tracks) {
    if (!track.label) throw MissingLabel(track.track_id);
    DimPrediction p;
    p.track_id = track.track_id;
    p.source = PredictionSource{std::nullopt, std::string(k_baseline_source)};
    if (track.label->vehicle_type == VehicleType::other) {
      pending_other.push_back(out.size());
    } else {
      auto it = per_type.find(track.label->vehicle_type);
      if (it == per_type.end()) throw UnknownType(fmt::format("no baseline for '{}'", to_string(track.label->vehicle_type)));
      p.dims = it->second;
      main_outputs.push_back(p.dims);
    }
    out.push_back(std::move(p));
  }
  if (!pending_other.empty()) {
    const Dimensions fallback = fallback_dims(main_outputs);
    for (std::size_t i : pending_other) out[i].dims = fallback;
  }
  return out;
}

}  // namespace dimseed
