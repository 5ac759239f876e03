#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "dimseed/errors.hpp"
#include "dimseed/manifest.hpp"

namespace fs = std::filesystem;
using namespace dimseed;

namespace {

struct CommonFlags {
  std::optional<std::string> config_file;
  std::optional<std::string> manifest;
  std::optional<std::string> out;
  std::optional<std::string> variant;
  std::optional<std::string> backend_config;
  std::optional<int> n_images;
  std::optional<double> range_filter;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cache_dir;
  bool no_cache = false;
  bool dry_run = false;
};

void add_run_flags(CLI::App* cmd, CommonFlags& f, bool with_variant) {
  cmd->add_option("--config", f.config_file, "JSON run config; flags override its values");
  cmd->add_option("--manifest", f.manifest, "Track manifest (JSON Lines)");
  cmd->add_option("--out", f.out, "Output directory");
  if (with_variant) cmd->add_option("--variant", f.variant, "Prompt variant");
  cmd->add_option("--backend-config", f.backend_config, "Backend config JSON");
  cmd->add_option("--n-images", f.n_images, "Context images per request");
  cmd->add_option("--range-filter", f.range_filter, "Maximum closest-approach range in meters");
  cmd->add_option("--seed", f.seed, "Seed for retry jitter");
  cmd->add_option("--cache-dir", f.cache_dir, "Response cache directory (default <out>/cache)");
  cmd->add_flag("--no-cache", f.no_cache, "Disable the response cache");
  cmd->add_flag("--dry-run", f.dry_run, "Print the planned requests and payload size, send nothing");
}

cli::RunConfig resolve_run_config(const CommonFlags& f) {
  cli::RunConfig cfg = f.config_file ? cli::RunConfig::from_json_file(*f.config_file) : cli::RunConfig{};
  if (f.manifest) cfg.manifest_path = *f.manifest;
  if (f.out) cfg.output_dir = *f.out;
  if (f.variant) cfg.prompt_variant = parse_prompt_variant(*f.variant);
  if (f.backend_config) cfg.backend = BackendConfig::load(*f.backend_config);
  if (f.n_images) cfg.sampler.n_images = *f.n_images;
  if (f.range_filter) cfg.range_filter_m = *f.range_filter;
  if (f.seed) cfg.seed = *f.seed;
  if (f.cache_dir) cfg.cache_dir = fs::path(*f.cache_dir);
  if (f.no_cache) cfg.use_cache = false;
  if (f.dry_run) cfg.dry_run = true;
  return cfg;
}

struct EvalFlags {
  std::vector<std::string> slices;
  double threshold = k_default_suspect_threshold;
  std::string generation = "overlap";
  std::string abstentions = "incorrect";
  std::optional<std::string> aliases;
};

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--slice", f.slices, "Metric slices: vehicle_type, modification, source")
      ->check(CLI::IsMember({"vehicle_type", "modification", "source"}));
  cmd->add_option("--threshold", f.threshold, "Relative deviation for label-suspect flags");
  cmd->add_option("--generation-match", f.generation, "Generation comparison")
      ->check(CLI::IsMember({"overlap", "exact"}));
  cmd->add_option("--abstentions", f.abstentions, "How abstentions count in identity accuracy")
      ->check(CLI::IsMember({"incorrect", "excluded"}));
  cmd->add_option("--aliases", f.aliases, "Make/model alias table JSON");
}

cli::EvalOptions to_eval_options(const EvalFlags& f, double range_filter_m) {
  cli::EvalOptions o;
  o.range_filter_m = range_filter_m;
  o.slices = f.slices;
  o.suspect_threshold = f.threshold;
  o.generation = f.generation == "exact" ? GenerationMatch::exact : GenerationMatch::overlap;
  o.abstentions = f.abstentions == "excluded" ? AbstentionScoring::excluded : AbstentionScoring::incorrect;
  if (f.aliases) o.alias_table = fs::path(*f.aliases);
  return o;
}

int report_failures(const std::vector<cli::TrackFailure>& failures) {
  if (failures.empty()) return 0;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& f : failures) j.push_back({{"track_id", f.track_id}, {"kind", f.kind}, {"message", f.message}});
  std::cerr << nlohmann::ordered_json{{"failed_tracks", j}}.dump(2) << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicle dimension estimation from multi-camera tracks with vision-language models"};
  app.require_subcommand(1);

  CommonFlags infer_flags;
  auto* infer = app.add_subcommand("infer", "Query the backend for every track in range");
  add_run_flags(infer, infer_flags, true);

  std::string bl_manifest, bl_out, bl_table = cli::default_size_class_table().string();
  double bl_range = cli::k_default_range_filter_m;
  auto* baseline = app.add_subcommand("baseline", "Size-class oracle baseline");
  baseline->add_option("--manifest", bl_manifest, "Track manifest")->required();
  baseline->add_option("--out", bl_out, "Output directory")->required();
  baseline->add_option("--table", bl_table, "Size-class table JSON");
  baseline->add_option("--range-filter", bl_range, "Maximum closest-approach range in meters");

  std::vector<std::string> ev_artifacts, ev_compare;
  std::string ev_manifest, ev_out;
  double ev_range = cli::k_default_range_filter_m;
  EvalFlags ev_flags;
  auto* eval = app.add_subcommand("eval", "Score inference artifacts against ground truth");
  eval->add_option("artifacts", ev_artifacts, "Artifact files (JSONL)");
  eval->add_option("--compare", ev_compare, "Artifacts to report side by side")->expected(2, -1);
  eval->add_option("--manifest", ev_manifest, "Track manifest with labels")->required();
  eval->add_option("--out", ev_out, "Report directory")->required();
  eval->add_option("--range-filter", ev_range, "Maximum closest-approach range in meters");
  add_eval_flags(eval, ev_flags);

  CommonFlags ab_flags;
  std::vector<std::string> ab_variants;
  std::optional<std::string> ab_table;
  bool ab_no_baseline = false;
  EvalFlags ab_eval;
  auto* ablate = app.add_subcommand("ablate", "Run every prompt variant and compare them");
  add_run_flags(ablate, ab_flags, false);
  ablate->add_option("--variants", ab_variants, "Subset of prompt variants (default all)");
  ablate->add_option("--table", ab_table, "Size-class table for the baseline column");
  ablate->add_flag("--no-baseline", ab_no_baseline, "Leave the baseline column out");
  add_eval_flags(ablate, ab_eval);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*infer) {
      const auto summary = cli::cmd_infer(resolve_run_config(infer_flags), std::cerr);
      return report_failures(summary.failures);
    }
    if (*baseline) {
      cli::cmd_baseline(bl_manifest, bl_table, bl_out, bl_range, std::cerr);
      return 0;
    }
    if (*eval) {
      std::vector<fs::path> paths(ev_artifacts.begin(), ev_artifacts.end());
      paths.insert(paths.end(), ev_compare.begin(), ev_compare.end());
      if (paths.empty()) throw ConfigError("eval needs at least one artifact");
      cli::cmd_eval(paths, ev_manifest, ev_out, to_eval_options(ev_flags, ev_range), std::cerr);
      return 0;
    }
    if (*ablate) {
      const auto cfg = resolve_run_config(ab_flags);
      std::vector<PromptVariant> variants;
      for (const auto& v : ab_variants) variants.push_back(parse_prompt_variant(v));
      if (variants.empty()) variants.assign(k_all_variants.begin(), k_all_variants.end());
      std::optional<fs::path> table;
      if (!ab_no_baseline) table = ab_table ? fs::path(*ab_table) : cli::default_size_class_table();
      const auto summary =
          cli::cmd_ablate(cfg, variants, table, to_eval_options(ab_eval, cfg.range_filter_m), std::cerr);
      std::vector<cli::TrackFailure> failures;
      for (const auto& [v, run] : summary.runs) failures.insert(failures.end(), run.failures.begin(), run.failures.end());
      for (const auto& [v, why] : summary.failed_variants) failures.push_back({"*", std::string(to_string(v)), why});
      return report_failures(failures);
    }
  } catch (const ManifestError& e) {
    std::cerr << "error: invalid manifest\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue.describe() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
