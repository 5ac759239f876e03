#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dimseed/backends.hpp"
#include "dimseed/clock.hpp"
#include "dimseed/evaluator.hpp"
#include "dimseed/promptkit.hpp"
#include "dimseed/sampler.hpp"

namespace dimseed::cli {

inline constexpr double k_default_range_filter_m = 55.0;

struct RunConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path output_dir;
  PromptVariant prompt_variant = PromptVariant::refined_vmmgr;
  BackendConfig backend;
  SamplerConfig sampler;
  double range_filter_m = k_default_range_filter_m;
  std::uint64_t seed = 0x5eedULL;
  /// Defaults to <output_dir>/cache.
  std::optional<std::filesystem::path> cache_dir;
  bool use_cache = true;
  bool dry_run = false;

  /// Throws ConfigError before any backend is contacted.
  void validate() const;
  std::filesystem::path effective_cache_dir() const;

  /// JSON layout mirroring the fields above; "backend" is either an inline
  /// object or a path to a backend config file.
  static RunConfig from_json_file(const std::filesystem::path& path);
};

struct TrackFailure {
  std::string track_id;
  std::string kind;
  std::string message;
};

struct InferSummary {
  std::filesystem::path artifact;
  std::size_t tracks = 0;
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::size_t no_input = 0;
  std::size_t planned_requests = 0;
  std::size_t planned_images = 0;
  std::size_t planned_payload_bytes = 0;
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
  std::vector<TrackFailure> failures;

  bool ok() const noexcept { return failures.empty(); }
};

std::filesystem::path artifact_path(const std::filesystem::path& output_dir, PromptVariant variant);

/// Best-view selection, sampling, prompting, inference and parsing for every
/// track within range; appends one record per track to
/// <out>/<variant>.jsonl, skipping tracks already present. `clock` overrides
/// the gateway clock (tests); `backend` overrides the configured backend.
InferSummary cmd_infer(const RunConfig& config, std::ostream& log, Clock* clock = nullptr,
                       std::unique_ptr<Backend> backend = nullptr);

struct BaselineSummary {
  std::filesystem::path artifact;
  std::size_t written = 0;
  std::size_t unlabeled = 0;
};

/// Oracle baseline artifact at <out>/baseline.jsonl, same format as
/// cmd_infer output.
BaselineSummary cmd_baseline(const std::filesystem::path& manifest_path, const std::filesystem::path& table_path,
                             const std::filesystem::path& output_dir, double range_filter_m, std::ostream& log);

struct EvalOptions {
  double range_filter_m = k_default_range_filter_m;
  std::vector<std::string> slices;  // vehicle_type | modification | source
  double suspect_threshold = k_default_suspect_threshold;
  GenerationMatch generation = GenerationMatch::overlap;
  AbstentionScoring abstentions = AbstentionScoring::incorrect;
  std::optional<std::filesystem::path> alias_table;
  std::string report_stem = "report";
};

struct EvaluatedRun {
  std::string name;
  MetricsReport metrics;
  std::optional<VmmgrAccuracy> vmmgr;
  std::optional<ModificationSplit> modification;
  std::vector<LabelSuspect> suspects;
  std::vector<std::string> missing_labels;
};

struct EvalSummary {
  std::vector<EvaluatedRun> runs;
  /// Artifacts that could not be scored (name, reason); only populated when
  /// several artifacts are compared.
  std::vector<std::pair<std::string, std::string>> failed;
  std::vector<std::filesystem::path> written;
};

/// Evaluates one or more artifacts against the manifest labels and writes
/// <stem>.json / .md / .csv into output_dir; several artifacts become
/// side-by-side columns.
EvalSummary cmd_eval(const std::vector<std::filesystem::path>& artifacts, const std::filesystem::path& manifest_path,
                     const std::filesystem::path& output_dir, const EvalOptions& options, std::ostream& log);

struct AblationSummary {
  std::vector<std::pair<PromptVariant, InferSummary>> runs;
  std::vector<std::pair<PromptVariant, std::string>> failed_variants;
  std::optional<EvalSummary> evaluation;
};

/// cmd_infer per variant (shared cache), then one comparison table with the
/// baseline (when `table_path` is given) followed by the variants from Basic
/// to Refined VMMGR.
AblationSummary cmd_ablate(const RunConfig& base, const std::vector<PromptVariant>& variants,
                           const std::optional<std::filesystem::path>& table_path, const EvalOptions& eval_options,
                           std::ostream& log, Clock* clock = nullptr,
                           const std::function<std::unique_ptr<Backend>()>& backend_factory = {});

/// Shipped size-class table location (source tree or install prefix).
std::filesystem::path default_size_class_table();

}  // namespace dimseed::cli
