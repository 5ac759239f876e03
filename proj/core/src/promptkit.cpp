#include "dimseed/promptkit.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dimseed/errors.hpp"

namespace dimseed {

namespace {

#include "prompt_templates.inc"

constexpr std::string_view k_system_heading = "## SYSTEM PROMPT\n";
constexpr std::string_view k_user_heading = "\n\n## USER PROMPT\n";
constexpr std::string_view k_image_token = "{{N_IMAGES}}";

std::string substitute(std::string_view text, std::string_view token, const std::string& value) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(token, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(value);
    pos = hit + token.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::string_view strip_header(std::string_view text) {
  while (text.starts_with("#!")) {
    const std::size_t nl = text.find('\n');
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
  }
  return text;
}

const ResponseSchema& make_schema(PromptVariant variant) {
  using F = FieldType;
  static const SchemaField length{"length_m", F::number};
  static const SchemaField width{"width_m", F::number};
  static const SchemaField height{"height_m", F::number};
  static const SchemaField vehicle_type{"vehicle_type", F::vehicle_type};
  static const SchemaField size_class{"size_class", F::string};
  static const SchemaField make{"make", F::string};
  static const SchemaField model{"model", F::string};
  static const SchemaField generation{"generation_year_range", F::string};

  static const ResponseSchema basic{{length, width, height}};
  static const ResponseSchema typed{{vehicle_type, length, width, height}};
  static const ResponseSchema sized{{vehicle_type, size_class, length, width, height}};
  static const ResponseSchema vmmgr{{vehicle_type, size_class, make, model, generation, length, width, height}};
  static const ResponseSchema refined{{
      {"significantly_occluded", F::boolean},
      make,
      model,
      generation,
      vehicle_type,
      {"configuration", F::string},
      length,
      width,
      height,
      {"length_modification", F::modification},
      {"width_modification", F::modification},
      {"height_modification", F::modification},
  }};
  switch (variant) {
    case PromptVariant::basic: return basic;
    case PromptVariant::vehicle_type: return typed;
    case PromptVariant::type_size_class: return sized;
    case PromptVariant::vmmgr: return vmmgr;
    case PromptVariant::refined_vmmgr: return refined;
  }
  return refined;
}

}  // namespace

std::string_view to_string(PromptVariant variant) noexcept {
  switch (variant) {
    case PromptVariant::basic: return "basic";
    case PromptVariant::vehicle_type: return "vehicle_type";
    case PromptVariant::type_size_class: return "type_size_class";
    case PromptVariant::vmmgr: return "vmmgr";
    case PromptVariant::refined_vmmgr: return "refined_vmmgr";
  }
  return "refined_vmmgr";
}

std::string_view display_name(PromptVariant variant) noexcept {
  switch (variant) {
    case PromptVariant::basic: return "Basic";
    case PromptVariant::vehicle_type: return "Vehicle Type";
    case PromptVariant::type_size_class: return "Type + Size Class";
    case PromptVariant::vmmgr: return "VMMGR";
    case PromptVariant::refined_vmmgr: return "Refined VMMGR";
  }
  return "Refined VMMGR";
}

PromptVariant parse_prompt_variant(std::string_view text) {
  for (auto v : k_all_variants) {
    if (text == to_string(v)) return v;
  }
  throw InvalidValue(fmt::format("unknown prompt variant '{}'", text));
}

bool ResponseSchema::has(std::string_view name) const noexcept {
  return std::any_of(fields.begin(), fields.end(), [&](const SchemaField& f) { return f.name == name; });
}

std::vector<std::string_view> ResponseSchema::names() const {
  std::vector<std::string_view> out;
  for (const auto& f : fields) out.push_back(f.name);
  return out;
}

const ResponseSchema& response_schema(PromptVariant variant) { return make_schema(variant); }

std::string_view prompt_template(PromptVariant variant) noexcept {
  switch (variant) {
    case PromptVariant::basic: return k_basic_template;
    case PromptVariant::vehicle_type: return k_vehicle_type_template;
    case PromptVariant::type_size_class: return k_type_size_class_template;
    case PromptVariant::vmmgr: return k_vmmgr_template;
    case PromptVariant::refined_vmmgr: return k_refined_vmmgr_template;
  }
  return k_refined_vmmgr_template;
}

std::string PromptBundle::render() const {
  return std::string(k_system_heading) + system_text + std::string(k_user_heading) + user_text + "\n";
}

PromptBundle build_prompt(PromptVariant variant, const SamplerConfig& config) {
  if (config.n_images < 1) throw InvalidValue(fmt::format("n_images must be >= 1, got {}", config.n_images));

  std::string_view body = strip_header(prompt_template(variant));
  if (!body.starts_with(k_system_heading)) throw Error("prompt template lacks a system heading");
  body.remove_prefix(k_system_heading.size());
  const std::size_t split = body.find(k_user_heading);
  if (split == std::string_view::npos) throw Error("prompt template lacks a user heading");

  std::string_view user = body.substr(split + k_user_heading.size());
  if (user.ends_with('\n')) user.remove_suffix(1);

  const std::string n = std::to_string(config.n_images);
  PromptBundle bundle;
  bundle.variant = variant;
  bundle.system_text = substitute(body.substr(0, split), k_image_token, n);
  bundle.user_text = substitute(user, k_image_token, n);
  bundle.response_schema = response_schema(variant);
  bundle.max_images = config.n_images;
  return bundle;
}

}  // namespace dimseed
