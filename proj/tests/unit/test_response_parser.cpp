#include <memory>
#include <gtest/gtest.h>

#include <random>

#include "dimseed/errors.hpp"
#include "dimseed/response_parser.hpp"
#include "support/oracles.hpp"

using namespace dimseed;

namespace {

// Owning copy so callers may pass a temporary outcome.
std::shared_ptr<const VlmResponse> prediction(const ParsedOutcome& o) {
  const auto* p = std::get_if<Prediction>(&o);
  return p ? std::make_shared<const VlmResponse>(p->response) : nullptr;
}

std::optional<AbstentionReason> abstention(const ParsedOutcome& o) {
  const auto* a = std::get_if<Abstention>(&o);
  return a ? std::optional<AbstentionReason>(a->reason) : std::nullopt;
}

constexpr const char* k_refined_ok = R"({
  "significantly_occluded": false,
  "make": "Ford",
  "model": "F-150",
  "generation_year_range": "2015–2020",
  "vehicle_type": "pickup truck",
  "configuration": "SuperCrew, 5.5 ft bed",
  "length_m": 5.89,
  "width_m": 2.03,
  "height_m": 1.96,
  "length_modification": null,
  "width_modification": null,
  "height_modification": "increased"
})";

}  // namespace

TEST(Parser, RefinedPrediction) {
  const auto out = parse_response(k_refined_ok, PromptVariant::refined_vmmgr);
  const auto r = prediction(out);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->make, "Ford");
  EXPECT_EQ(r->generation_year_range, YearRange::make(2015, 2020));
  EXPECT_EQ(r->vehicle_type, VehicleType::pickup_truck);
  EXPECT_EQ(r->dims, (Dimensions{5.89, 2.03, 1.96}));
  EXPECT_EQ(r->height_modification, Modification::increased);
  EXPECT_FALSE(r->length_modification.has_value());
  EXPECT_TRUE(modification_flags(*r));
}

TEST(Parser, FencesAndProseAreTolerated) {
  const std::string wrapped = std::string("Sure, here you go:\n```json\n") + k_refined_ok + "\n```\nThanks!";
  EXPECT_NE(prediction(parse_response(wrapped, PromptVariant::refined_vmmgr)), nullptr);
  const std::string braces_first = std::string("Notes {not json} then ") + k_refined_ok;
  EXPECT_NE(prediction(parse_response(braces_first, PromptVariant::refined_vmmgr)), nullptr);
}

TEST(Parser, OccludedAbstainsEvenWithOtherFields) {
  const auto out = parse_response(R"({"significantly_occluded": true, "length_m": 4.5, "width_m": "bogus"})",
                                  PromptVariant::refined_vmmgr);
  EXPECT_EQ(abstention(out), AbstentionReason::occluded);
  EXPECT_EQ(abstention(parse_response(R"({"significantly_occluded": "true"})", PromptVariant::refined_vmmgr)),
            AbstentionReason::occluded);
}

TEST(Parser, NullOrPartialDimsAbstain) {
  EXPECT_EQ(abstention(parse_response(R"({"length_m": null, "width_m": null, "height_m": null})",
                                      PromptVariant::basic)),
            AbstentionReason::null_dims);
  EXPECT_EQ(abstention(parse_response(R"({"length_m": 4.5, "width_m": 1.8})", PromptVariant::basic)),
            AbstentionReason::null_dims);
}

TEST(Parser, LenientScalars) {
  const auto r =
      prediction(parse_response(R"({"length_m": "4.5", "width_m": 1.8, "height_m": 1, "extra": [1,2]})",
                                PromptVariant::basic));
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->dims, (Dimensions{4.5, 1.8, 1.0}));
  const auto m = prediction(parse_response(
      R"({"vehicle_type":"SUV","size_class":"midsize","make":"Kia","model":5,"generation_year_range":"2021",)"
      R"("length_m":4.6,"width_m":1.86,"height_m":1.7})",
      PromptVariant::vmmgr));
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->model, "5");
  EXPECT_EQ(m->generation_year_range, YearRange::make(2021, 2021));
}

TEST(Parser, Failures) {
  auto is_failure = [](const ParsedOutcome& o) { return std::holds_alternative<ParseFailure>(o); };
  EXPECT_TRUE(is_failure(parse_response("", PromptVariant::basic)));
  EXPECT_TRUE(is_failure(parse_response("no json at all", PromptVariant::basic)));
  EXPECT_TRUE(is_failure(parse_response("[1, 2, 3]", PromptVariant::basic)));
  EXPECT_TRUE(is_failure(parse_response(R"({"length_m": -4, "width_m": 1.8, "height_m": 1.4})", PromptVariant::basic)));
  EXPECT_TRUE(is_failure(parse_response(R"({"length_m": 45, "width_m": 1.8, "height_m": 1.4})", PromptVariant::basic)));
  EXPECT_TRUE(is_failure(parse_response(R"({"length_m": "long", "width_m": 1.8, "height_m": 1.4})",
                                        PromptVariant::basic)));
  EXPECT_TRUE(is_failure(parse_response(
      R"({"vehicle_type":"spaceship","length_m":4,"width_m":1.8,"height_m":1.4})", PromptVariant::vehicle_type)));
  EXPECT_TRUE(is_failure(parse_response(
      R"({"significantly_occluded":false,"generation_year_range":"recent","length_m":4,"width_m":1.8,"height_m":1.4})",
      PromptVariant::refined_vmmgr)));
  EXPECT_TRUE(is_failure(parse_response(
      R"({"significantly_occluded":false,"length_m":4,"width_m":1.8,"height_m":1.4,"length_modification":"longer"})",
      PromptVariant::refined_vmmgr)));
  const auto f = parse_response(std::string(500, 'x'), PromptVariant::basic);
  ASSERT_TRUE(is_failure(f));
  EXPECT_LT(std::get<ParseFailure>(f).detail.size(), 300u);
}

TEST(Parser, FieldsOutsideSchemaAreIgnored) {
  const auto r = prediction(
      parse_response(R"({"make":"Honda","length_m":4.5,"width_m":1.8,"height_m":1.4})", PromptVariant::basic));
  ASSERT_NE(r, nullptr);
  EXPECT_FALSE(r->make.has_value());
}

TEST(Parser, RoundTripsSerializedResponses) {
  std::mt19937_64 rng(99);
  for (auto v : k_all_variants) {
    for (int i = 0; i < 200; ++i) {
      const VlmResponse r = dimseed::testing::random_response(rng, v);
      const std::string text = serialize_response(r, v);
      const auto back = prediction(parse_response(text, v));
      ASSERT_NE(back, nullptr) << text;
      EXPECT_EQ(*back, r) << text;
      EXPECT_EQ(serialize_response(*back, v), text);
    }
  }
}

TEST(Parser, NeverThrowsOnMutations) {
  std::mt19937_64 rng(5);
  const std::string seed = k_refined_ok;
  for (int i = 0; i < 2000; ++i) {
    const std::string s = dimseed::testing::mutate(rng, seed);
    for (auto v : {PromptVariant::basic, PromptVariant::refined_vmmgr}) {
      const auto out = parse_response(s, v);
      if (const auto r = prediction(out)) {
        EXPECT_TRUE(r->dims && r->dims->valid());
      }
    }
  }
}

TEST(YearRanges, Formats) {
  EXPECT_EQ(parse_year_range("2013-2018"), YearRange::make(2013, 2018));
  EXPECT_EQ(parse_year_range(" 2013 – 2018 "), YearRange::make(2013, 2018));
  EXPECT_EQ(parse_year_range("2013–2018"), YearRange::make(2013, 2018));
  EXPECT_EQ(parse_year_range("2021"), YearRange::make(2021, 2021));
  EXPECT_THROW(parse_year_range("2018-2013"), InvalidYearRange);
  EXPECT_THROW(parse_year_range("late 2010s"), InvalidYearRange);
  EXPECT_THROW(parse_year_range(""), InvalidYearRange);
}

TEST(Names, Normalization) {
  EXPECT_EQ(normalize_name("  Mercedes-Benz  "), "mercedesbenz");
  EXPECT_EQ(normalize_name("F-150"), normalize_name("f150"));
  EXPECT_EQ(normalize_name("Model   3"), "model 3");
}

TEST(Matching, MakeModelGeneration) {
  GroundTruthLabel truth;
  truth.make = "Toyota";
  truth.model = "Camry";
  truth.generation_range = YearRange::make(2018, 2024);
  VlmResponse pred;
  pred.make = "toyota";
  pred.model = "CAMRY";
  pred.generation_year_range = YearRange::make(2020, 2022);
  EXPECT_TRUE(vmmgr_match(pred, truth));
  EXPECT_FALSE(vmmgr_match(pred, truth, MatchOptions{GenerationMatch::exact, nullptr}));
  pred.generation_year_range = YearRange::make(2012, 2017);
  EXPECT_FALSE(vmmgr_match(pred, truth));
  pred.generation_year_range.reset();
  EXPECT_FALSE(vmmgr_match(pred, truth));
  truth.model.reset();
  EXPECT_THROW(vmmgr_match(pred, truth), MissingTruth);
}

TEST(Matching, AliasTable) {
  const auto aliases = AliasTable::from_json_text(R"({"Volkswagen": ["VW"], "Chevrolet": ["Chevy"]})");
  GroundTruthLabel truth;
  truth.make = "Volkswagen";
  truth.model = "Golf";
  truth.generation_range = YearRange::make(2015, 2021);
  VlmResponse pred;
  pred.make = "VW";
  pred.model = "golf";
  pred.generation_year_range = YearRange::make(2015, 2021);
  EXPECT_FALSE(vmmgr_match(pred, truth));
  EXPECT_TRUE(vmmgr_match(pred, truth, MatchOptions{GenerationMatch::overlap, &aliases}));
  EXPECT_EQ(aliases.canonicalize("chevy"), aliases.canonicalize("Chevrolet"));
}
