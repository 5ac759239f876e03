#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "dimseed/promptkit.hpp"
#include "dimseed/types.hpp"

namespace dimseed {

enum class Modification { increased, decreased };

std::string_view to_string(Modification m) noexcept;

/// Typed model answer. Fields outside the prompt variant's schema stay empty.
struct VlmResponse {
  bool significantly_occluded = false;
  std::optional<std::string> make;
  std::optional<std::string> model;
  std::optional<YearRange> generation_year_range;
  std::optional<VehicleType> vehicle_type;
  std::optional<std::string> size_class;
  std::optional<std::string> configuration;
  std::optional<Dimensions> dims;
  std::optional<Modification> length_modification;
  std::optional<Modification> width_modification;
  std::optional<Modification> height_modification;

  friend bool operator==(const VlmResponse&, const VlmResponse&) = default;
};

enum class AbstentionReason { occluded, null_dims, no_input };

std::string_view to_string(AbstentionReason reason) noexcept;
AbstentionReason parse_abstention_reason(std::string_view text);

struct Prediction {
  VlmResponse response;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct Abstention {
  AbstentionReason reason = AbstentionReason::null_dims;
  friend bool operator==(const Abstention&, const Abstention&) = default;
};

struct ParseFailure {
  std::string detail;
  friend bool operator==(const ParseFailure&, const ParseFailure&) = default;
};

using ParsedOutcome = std::variant<Prediction, Abstention, ParseFailure>;

/// Upper bound on any single predicted dimension; larger values are treated
/// as hallucinations.
inline constexpr double k_max_dimension_m = 30.0;

/// Total: never throws. Finds the first JSON object in `raw_text` (markdown
/// fences and surrounding prose are fine), types it against the variant's
/// schema and classifies it.
ParsedOutcome parse_response(std::string_view raw_text, PromptVariant variant) noexcept;

/// Serializes the fields of `response` that belong to the variant's schema,
/// in schema order. parse_response inverts this for well-formed values.
std::string serialize_response(const VlmResponse& response, PromptVariant variant);

/// Accepts "YYYY-YYYY", "YYYY–YYYY" (en dash) and "YYYY"; surrounding
/// whitespace is ignored. Throws InvalidYearRange otherwise.
YearRange parse_year_range(std::string_view text);

/// Lowercase, drop ASCII punctuation, trim and collapse internal whitespace.
std::string normalize_name(std::string_view text);

/// Canonical name -> aliases, all compared after normalize_name.
class AliasTable {
 public:
  AliasTable() = default;
  void add(std::string_view canonical, std::string_view alias);
  std::string canonicalize(std::string_view name) const;
  bool empty() const noexcept { return aliases_.empty(); }

  /// JSON object of canonical name -> array of aliases.
  static AliasTable load(const std::filesystem::path& path);
  static AliasTable from_json_text(std::string_view text);

 private:
  std::map<std::string, std::string, std::less<>> aliases_;
};

enum class GenerationMatch { exact, overlap };

struct MatchOptions {
  GenerationMatch generation = GenerationMatch::overlap;
  const AliasTable* aliases = nullptr;
};

/// True iff make, model and generation all agree. Throws MissingTruth when
/// the label lacks any of the three.
bool vmmgr_match(const VlmResponse& pred, const GroundTruthLabel& truth, const MatchOptions& options = {});

/// True iff any per-dimension modification flag is set.
bool modification_flags(const VlmResponse& pred) noexcept;

}  // namespace dimseed
