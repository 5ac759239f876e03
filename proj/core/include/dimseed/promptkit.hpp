#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dimseed/sampler.hpp"

namespace dimseed {

enum class PromptVariant { basic, vehicle_type, type_size_class, vmmgr, refined_vmmgr };

/// Ablation order, simplest prompt first.
inline constexpr std::array<PromptVariant, 5> k_all_variants = {
    PromptVariant::basic, PromptVariant::vehicle_type, PromptVariant::type_size_class, PromptVariant::vmmgr,
    PromptVariant::refined_vmmgr};

std::string_view to_string(PromptVariant variant) noexcept;
/// Report column header ("Type + Size Class").
std::string_view display_name(PromptVariant variant) noexcept;
/// Throws InvalidValue for unknown names.
PromptVariant parse_prompt_variant(std::string_view text);

enum class FieldType { boolean, string, number, vehicle_type, modification };

struct SchemaField {
  std::string_view name;
  FieldType type;
  bool nullable = true;
};

/// Keys the model is asked to fill, in template order.
struct ResponseSchema {
  std::vector<SchemaField> fields;

  bool has(std::string_view name) const noexcept;
  std::vector<std::string_view> names() const;
};

const ResponseSchema& response_schema(PromptVariant variant);

struct PromptBundle {
  PromptVariant variant = PromptVariant::refined_vmmgr;
  std::string system_text;
  std::string user_text;
  ResponseSchema response_schema;
  int max_images = 1;

  /// The prompt in template-file layout (without the "#!" header lines).
  std::string render() const;
};

/// Deterministic for a given (variant, config).
PromptBundle build_prompt(PromptVariant variant, const SamplerConfig& config);

/// Raw template text as shipped under prompts/, header lines included.
std::string_view prompt_template(PromptVariant variant) noexcept;

}  // namespace dimseed
