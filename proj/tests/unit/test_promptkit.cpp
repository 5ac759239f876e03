#include <gtest/gtest.h>

#include "dimseed/errors.hpp"
#include "dimseed/promptkit.hpp"
#include "support/scratch.hpp"

using namespace dimseed;
using dimseed::testing::golden_dir;
using dimseed::testing::slurp;

TEST(Prompt, RefinedMatchesGoldenByteForByte) {
  const auto bundle = build_prompt(PromptVariant::refined_vmmgr, SamplerConfig{10});
  EXPECT_EQ(bundle.render(), slurp(golden_dir() / "refined_vmmgr.txt"));
}

TEST(Prompt, RefinedDoesNotDependOnImageBudget) {
  EXPECT_EQ(build_prompt(PromptVariant::refined_vmmgr, SamplerConfig{3}).render(),
            build_prompt(PromptVariant::refined_vmmgr, SamplerConfig{10}).render());
}

TEST(Prompt, RefinedSpotTokens) {
  const auto b = build_prompt(PromptVariant::refined_vmmgr, SamplerConfig{});
  for (const char* token : {"Occlusion Assessment", "significantly_occluded", "Frame Synthesis & Vehicle Identification",
                            "A standard tow hitch should **not** be flagged"}) {
    EXPECT_NE(b.user_text.find(token), std::string::npos) << token;
  }
  EXPECT_NE(b.system_text.find("expert vehicle perception system"), std::string::npos);
  EXPECT_EQ(b.user_text.find("{{"), std::string::npos);
}

TEST(Prompt, OtherVariantsMatchSnapshots) {
  for (auto v : {PromptVariant::basic, PromptVariant::vehicle_type, PromptVariant::type_size_class,
                 PromptVariant::vmmgr}) {
    const auto b = build_prompt(v, SamplerConfig{10});
    EXPECT_EQ(b.render(), slurp(golden_dir() / (std::string(to_string(v)) + ".n10.txt"))) << to_string(v);
    EXPECT_EQ(b.user_text.find("{{"), std::string::npos);
    EXPECT_NE(b.user_text.find("10"), std::string::npos);
  }
}

TEST(Prompt, Deterministic) {
  for (auto v : k_all_variants) {
    EXPECT_EQ(build_prompt(v, SamplerConfig{7}).render(), build_prompt(v, SamplerConfig{7}).render());
  }
}

TEST(Prompt, BundleCarriesSchemaAndImageBudget) {
  const auto b = build_prompt(PromptVariant::vmmgr, SamplerConfig{6});
  EXPECT_EQ(b.max_images, 6);
  EXPECT_EQ(b.variant, PromptVariant::vmmgr);
  EXPECT_EQ(b.response_schema.names(), response_schema(PromptVariant::vmmgr).names());
  EXPECT_THROW(build_prompt(PromptVariant::basic, SamplerConfig{0}), InvalidValue);
}

TEST(Schema, DeclaredFieldSets) {
  using V = std::vector<std::string_view>;
  EXPECT_EQ(response_schema(PromptVariant::basic).names(), (V{"length_m", "width_m", "height_m"}));
  EXPECT_EQ(response_schema(PromptVariant::vehicle_type).names(),
            (V{"vehicle_type", "length_m", "width_m", "height_m"}));
  EXPECT_EQ(response_schema(PromptVariant::type_size_class).names(),
            (V{"vehicle_type", "size_class", "length_m", "width_m", "height_m"}));
  EXPECT_EQ(response_schema(PromptVariant::vmmgr).names(),
            (V{"vehicle_type", "size_class", "make", "model", "generation_year_range", "length_m", "width_m",
               "height_m"}));
  EXPECT_EQ(response_schema(PromptVariant::refined_vmmgr).names(),
            (V{"significantly_occluded", "make", "model", "generation_year_range", "vehicle_type", "configuration",
               "length_m", "width_m", "height_m", "length_modification", "width_modification",
               "height_modification"}));
}

TEST(Schema, TemplatesListEveryField) {
  for (auto v : k_all_variants) {
    const auto text = build_prompt(v, SamplerConfig{}).user_text;
    for (auto name : response_schema(v).names()) {
      EXPECT_NE(text.find("\"" + std::string(name) + "\""), std::string::npos) << to_string(v) << ": " << name;
    }
  }
}

TEST(Variants, NamesRoundTripInAblationOrder) {
  EXPECT_EQ(k_all_variants.front(), PromptVariant::basic);
  EXPECT_EQ(k_all_variants.back(), PromptVariant::refined_vmmgr);
  for (auto v : k_all_variants) EXPECT_EQ(parse_prompt_variant(to_string(v)), v);
  EXPECT_EQ(display_name(PromptVariant::type_size_class), "Type + Size Class");
  EXPECT_THROW(parse_prompt_variant("fancy"), InvalidValue);
}

TEST(Variants, RawTemplateKeepsHeader) {
  EXPECT_TRUE(prompt_template(PromptVariant::basic).starts_with("#! variant: basic"));
}
