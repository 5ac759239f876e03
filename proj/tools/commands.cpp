#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dimseed/artifact.hpp"
#include "dimseed/baseline.hpp"
#include "dimseed/errors.hpp"
#include "dimseed/gateway.hpp"
#include "dimseed/manifest.hpp"
#include "dimseed/report.hpp"
#include "dimseed/response_cache.hpp"
#include "dimseed/response_parser.hpp"

namespace dimseed::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
    out << text;
  }
  fs::rename(tmp, path);
}

std::string mime_for(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  return "image/jpeg";
}

fs::path resolve_against(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

struct PlannedTrack {
  const VehicleTrack* track = nullptr;
  std::vector<BestViewFrame> frames;
};

std::vector<FrameRef> frame_refs(const std::vector<BestViewFrame>& frames) {
  std::vector<FrameRef> refs;
  refs.reserve(frames.size());
  for (const auto& f : frames) refs.push_back({f.timestamp, f.camera_id});
  return refs;
}

bool has_field(PromptVariant variant, std::string_view name) { return response_schema(variant).has(name); }

}  // namespace

void RunConfig::validate() const {
  if (manifest_path.empty()) throw ConfigError("manifest path is required");
  if (!fs::exists(manifest_path)) throw ConfigError(fmt::format("manifest not found: {}", manifest_path.string()));
  if (output_dir.empty()) throw ConfigError("output directory is required");
  if (sampler.n_images < 1) throw ConfigError("n_images must be >= 1");
  if (!(range_filter_m > 0.0)) throw ConfigError("range_filter_m must be > 0");
  backend.validate();
}

fs::path RunConfig::effective_cache_dir() const { return cache_dir ? *cache_dir : output_dir / "cache"; }

RunConfig RunConfig::from_json_file(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", path.string()));
  const fs::path base = path.parent_path();
  RunConfig cfg;
  try {
    if (j.contains("manifest")) cfg.manifest_path = resolve_against(j.at("manifest").get<std::string>(), base);
    if (j.contains("out")) cfg.output_dir = resolve_against(j.at("out").get<std::string>(), base);
    if (j.contains("variant")) cfg.prompt_variant = parse_prompt_variant(j.at("variant").get<std::string>());
    if (j.contains("n_images")) cfg.sampler.n_images = j.at("n_images").get<int>();
    if (j.contains("range_filter_m")) cfg.range_filter_m = j.at("range_filter_m").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("cache_dir")) cfg.cache_dir = resolve_against(j.at("cache_dir").get<std::string>(), base);
    if (j.contains("use_cache")) cfg.use_cache = j.at("use_cache").get<bool>();
    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      if (b.is_string()) {
        cfg.backend = BackendConfig::load(resolve_against(b.get<std::string>(), base));
      } else {
        cfg.backend = BackendConfig::from_json_text(b.dump(), base);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const InvalidValue& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return cfg;
}

fs::path artifact_path(const fs::path& output_dir, PromptVariant variant) {
  return output_dir / fmt::format("{}.jsonl", to_string(variant));
}

InferSummary cmd_infer(const RunConfig& config, std::ostream& log, Clock* clock, std::unique_ptr<Backend> backend) {
  config.validate();
  // Credentials and endpoints are checked here, before any request is sent.
  if (!config.dry_run && !backend) backend = make_backend(config.backend);

  const Manifest manifest = load_manifest(config.manifest_path);
  const auto tracks = filter_by_range(manifest.tracks, config.range_filter_m);
  const PromptBundle bundle = build_prompt(config.prompt_variant, config.sampler);
  const PredictionSource source{config.prompt_variant, config.backend.model_name};

  InferSummary summary;
  summary.artifact = artifact_path(config.output_dir, config.prompt_variant);
  summary.tracks = tracks.size();

  std::set<std::string> done;
  if (!config.dry_run) {
    fs::create_directories(config.output_dir);
    done = recover_artifact(summary.artifact);
  }

  std::vector<PlannedTrack> plan;
  for (const auto& track : tracks) {
    if (done.count(track.track_id) != 0) {
      ++summary.skipped;
      continue;
    }
    plan.push_back({&track, sample_uniform(select_best_views(track, manifest.calibrations), config.sampler.n_images)});
  }

  if (config.dry_run) {
    for (const auto& p : plan) {
      if (p.frames.empty()) {
        ++summary.no_input;
        continue;
      }
      ++summary.planned_requests;
      summary.planned_images += p.frames.size();
      std::size_t bytes = bundle.system_text.size() + bundle.user_text.size();
      for (const auto& f : p.frames) {
        std::error_code ec;
        const auto size = fs::file_size(manifest.resolve_crop(f.crop_ref), ec);
        if (!ec) bytes += (static_cast<std::size_t>(size) + 2) / 3 * 4;
      }
      summary.planned_payload_bytes += bytes;
    }
    const auto max_retries = static_cast<std::size_t>(std::max(0, config.backend.max_retries));
    ordered_json j{{"variant", to_string(config.prompt_variant)},
                   {"backend", to_string(config.backend.backend_kind)},
                   {"model", config.backend.model_name},
                   {"tracks", summary.tracks},
                   {"already_done", summary.skipped},
                   {"no_input", summary.no_input},
                   {"requests", summary.planned_requests},
                   {"max_requests_with_retries", summary.planned_requests * (1 + max_retries)},
                   {"images", summary.planned_images},
                   {"payload_bytes", summary.planned_payload_bytes}};
    log << j.dump(2) << '\n';
    return summary;
  }

  GatewayOptions gopts;
  if (config.use_cache) gopts.cache_dir = config.effective_cache_dir();
  gopts.clock = clock;
  gopts.seed = config.seed;
  Gateway gateway(config.backend, std::move(backend), gopts);

  std::ofstream out(summary.artifact, std::ios::binary | std::ios::app);
  if (!out) throw ConfigError(fmt::format("cannot open {}", summary.artifact.string()));

  const std::size_t chunk = static_cast<std::size_t>(std::max(1, config.backend.max_parallel)) * 4;
  for (std::size_t begin = 0; begin < plan.size(); begin += chunk) {
    const std::size_t end = std::min(plan.size(), begin + chunk);
    std::vector<InferenceJob> jobs;
    std::vector<std::size_t> job_owner;
    std::map<std::size_t, ArtifactRecord> ready;

    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = plan[i];
      if (p.frames.empty()) {
        ready[i] = ArtifactRecord{p.track->track_id, source, Abstention{AbstentionReason::no_input}, {}, std::nullopt};
        ++summary.no_input;
        continue;
      }
      InferenceJob job{p.track->track_id, bundle, {}};
      try {
        for (const auto& f : p.frames) {
          const fs::path crop = manifest.resolve_crop(f.crop_ref);
          std::ifstream in(crop, std::ios::binary);
          if (!in) throw Error(fmt::format("cannot read crop {}", crop.string()));
          std::ostringstream ss;
          ss << in.rdbuf();
          job.images.push_back({ss.str(), mime_for(crop)});
        }
      } catch (const Error& e) {
        summary.failures.push_back({p.track->track_id, "missing_crop", e.what()});
        continue;
      }
      jobs.push_back(std::move(job));
      job_owner.push_back(i);
    }

    if (!jobs.empty()) {
      const auto results = gateway.infer_batch(jobs);
      for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& p = plan[job_owner[k]];
        const auto& r = results[k];
        if (!r.ok()) {
          summary.failures.push_back({p.track->track_id, std::string(to_string(r.error->kind)), r.error->message});
          continue;
        }
        ready[job_owner[k]] = ArtifactRecord{p.track->track_id, source,
                                             parse_response(r.inference->raw_text, config.prompt_variant),
                                             frame_refs(p.frames), r.inference->raw_text};
      }
    }

    for (const auto& [i, record] : ready) {
      out << to_jsonl_line(record) << '\n';
      ++summary.written;
    }
    out.flush();
  }

  const GatewayStats stats = gateway.stats();
  summary.backend_calls = stats.backend_calls;
  summary.cache_hits = stats.cache_hits;

  ordered_json failures = ordered_json::array();
  for (const auto& f : summary.failures) failures.push_back({{"track_id", f.track_id}, {"kind", f.kind}, {"message", f.message}});
  ordered_json run_stats{{"variant", to_string(config.prompt_variant)},
                         {"backend", gateway.backend_name()},
                         {"model", config.backend.model_name},
                         {"decoding", "provider_default"},
                         {"tracks", summary.tracks},
                         {"written", summary.written},
                         {"skipped", summary.skipped},
                         {"no_input", summary.no_input},
                         {"backend_calls", stats.backend_calls},
                         {"cache_hits", stats.cache_hits},
                         {"retries", stats.retries},
                         {"failures", failures}};
  write_file(config.output_dir / fmt::format("{}.run_stats.json", to_string(config.prompt_variant)),
             run_stats.dump(2) + "\n");

  log << fmt::format("[infer] {}: {} tracks, {} written, {} skipped, {} failed ({} backend calls, {} cache hits)\n",
                     to_string(config.prompt_variant), summary.tracks, summary.written, summary.skipped,
                     summary.failures.size(), stats.backend_calls, stats.cache_hits);
  return summary;
}

BaselineSummary cmd_baseline(const fs::path& manifest_path, const fs::path& table_path, const fs::path& output_dir,
                             double range_filter_m, std::ostream& log) {
  const SizeClassTable table = SizeClassTable::load(table_path);
  const Manifest manifest = load_manifest(manifest_path);
  const auto in_range = filter_by_range(manifest.tracks, range_filter_m);

  BaselineSummary summary;
  std::vector<VehicleTrack> labeled;
  for (const auto& t : in_range) {
    if (t.label) {
      labeled.push_back(t);
    } else {
      ++summary.unlabeled;
    }
  }
  if (summary.unlabeled > 0) {
    log << fmt::format("[baseline] warning: {} unlabeled track(s) skipped\n", summary.unlabeled);
  }

  std::string text;
  for (const auto& record : baseline_records(run_baseline(labeled, table))) {
    text += to_jsonl_line(record);
    text += '\n';
  }
  summary.artifact = output_dir / "baseline.jsonl";
  write_file(summary.artifact, text);
  summary.written = labeled.size();
  log << fmt::format("[baseline] {} tracks written to {}\n", summary.written, summary.artifact.string());
  return summary;
}

namespace {

EvaluatedRun evaluate_one(const std::vector<ArtifactRecord>& records, const std::string& name, const LabelMap& labels,
                          const std::set<std::string>& in_range, const EvalOptions& options,
                          const AliasTable* aliases, std::ostream& log) {
  EvaluatedRun run;
  run.name = name;

  std::vector<TrackOutcome> outcomes;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (in_range.count(r.track_id) == 0) continue;
    seen.insert(r.track_id);
    if (labels.count(r.track_id) == 0) {
      run.missing_labels.push_back(r.track_id);
      continue;
    }
    outcomes.push_back(to_track_outcome(r));
  }
  std::size_t uncovered = 0;
  for (const auto& [id, label] : labels) {
    if (seen.count(id) == 0) ++uncovered;
  }
  if (!run.missing_labels.empty()) {
    log << fmt::format("[eval] warning: {}: {} track(s) have no label and were excluded\n", name,
                       run.missing_labels.size());
  }
  if (uncovered > 0) {
    log << fmt::format("[eval] warning: {}: {} labeled track(s) have no record\n", name, uncovered);
  }

  const auto preds = impute_abstentions(outcomes);
  run.metrics = compute_metrics(preds, labels);
  for (const auto& s : options.slices) {
    if (s == "vehicle_type") {
      add_slices(run.metrics, preds, labels, slice_by_vehicle_type());
    } else if (s == "modification") {
      add_slices(run.metrics, preds, labels, slice_by_modification());
    } else if (s == "source") {
      add_slices(run.metrics, preds, labels, slice_by_source());
    } else {
      throw ConfigError(fmt::format("unknown slice '{}'", s));
    }
  }

  const auto variant = records.empty() ? std::nullopt : records.front().source.variant;
  MatchOptions match{options.generation, aliases};
  if (variant && has_field(*variant, "make")) {
    run.vmmgr = vmmgr_accuracy(outcomes, labels, VmmgrOptions{match, options.abstentions});
  }
  if (variant && has_field(*variant, "length_modification")) {
    run.modification = modification_split(preds, labels);
  }
  run.suspects = flag_label_suspects(preds, labels, options.suspect_threshold, match);
  return run;
}

std::string column_name(const std::vector<ArtifactRecord>& records, const fs::path& path) {
  if (records.empty()) return path.stem().string();
  const auto& s = records.front().source;
  return s.variant ? std::string(display_name(*s.variant)) : std::string("Baseline");
}

}  // namespace

EvalSummary cmd_eval(const std::vector<fs::path>& artifacts, const fs::path& manifest_path, const fs::path& output_dir,
                     const EvalOptions& options, std::ostream& log) {
  if (artifacts.empty()) throw ConfigError("no artifacts to evaluate");
  for (const auto& s : options.slices) {
    if (s != "vehicle_type" && s != "modification" && s != "source") {
      throw ConfigError(fmt::format("unknown slice '{}' (expected vehicle_type, modification or source)", s));
    }
  }
  if (!(options.suspect_threshold > 0.0)) throw ConfigError("threshold must be > 0");

  const Manifest manifest = load_manifest(manifest_path);
  const auto tracks = filter_by_range(manifest.tracks, options.range_filter_m);
  const LabelMap labels = labels_of(tracks);
  std::set<std::string> in_range;
  for (const auto& t : tracks) in_range.insert(t.track_id);

  std::optional<AliasTable> aliases;
  if (options.alias_table) aliases = AliasTable::load(*options.alias_table);

  EvalSummary summary;
  std::set<std::string> used_names;
  for (const auto& path : artifacts) {
    const auto records = read_artifact(path);
    std::string name = column_name(records, path);
    if (!used_names.insert(name).second) {
      name = path.stem().string();
      for (int k = 2; !used_names.insert(name).second; ++k) name = fmt::format("{}#{}", path.stem().string(), k);
    }
    if (artifacts.size() == 1) {
      summary.runs.push_back(evaluate_one(records, name, labels, in_range, options, aliases ? &*aliases : nullptr, log));
      continue;
    }
    try {
      summary.runs.push_back(evaluate_one(records, name, labels, in_range, options, aliases ? &*aliases : nullptr, log));
    } catch (const Error& e) {
      log << fmt::format("[eval] {} could not be scored: {}\n", name, e.what());
      summary.failed.emplace_back(name, e.what());
    }
  }
  if (summary.runs.empty()) throw Error("no artifact could be scored");

  ordered_json report = ordered_json::object();
  report["range_filter_m"] = options.range_filter_m;
  report["generation_match"] = options.generation == GenerationMatch::overlap ? "overlap" : "exact";
  report["abstentions_in_vmmgr"] = options.abstentions == AbstentionScoring::incorrect ? "incorrect" : "excluded";
  report["suspect_threshold"] = options.suspect_threshold;
  ordered_json runs = ordered_json::array();
  std::vector<ReportColumn> columns;
  std::vector<VmmgrColumn> vmmgr_rows;
  for (const auto& r : summary.runs) {
    ordered_json j;
    j["name"] = r.name;
    j["metrics"] = ordered_json::parse(metrics_to_json(r.metrics));
    if (r.vmmgr) j["vmmgr"] = ordered_json::parse(vmmgr_to_json(*r.vmmgr));
    if (r.modification) j["modification_split"] = ordered_json::parse(modification_to_json(*r.modification));
    j["label_suspects"] = ordered_json::parse(suspects_to_json(r.suspects));
    j["unlabeled_tracks"] = r.missing_labels;
    runs.push_back(std::move(j));
    columns.emplace_back(r.name, r.metrics);
    if (r.vmmgr) vmmgr_rows.emplace_back(r.name, *r.vmmgr);
  }
  report["runs"] = std::move(runs);
  if (!summary.failed.empty()) {
    ordered_json failed = ordered_json::array();
    for (const auto& [n, why] : summary.failed) failed.push_back({{"name", n}, {"reason", why}});
    report["failed"] = std::move(failed);
  }

  std::string md = "## Dimension estimation\n\n" + metrics_markdown(columns);
  bool any_slices = false;
  for (const auto& r : summary.runs) any_slices = any_slices || !r.metrics.slices.empty();
  if (any_slices) {
    std::set<std::string> slice_names;
    for (const auto& r : summary.runs)
      for (const auto& [k, v] : r.metrics.slices) slice_names.insert(k);
    for (const auto& slice : slice_names) {
      std::vector<ReportColumn> cols;
      for (const auto& r : summary.runs) {
        auto it = r.metrics.slices.find(slice);
        if (it != r.metrics.slices.end()) cols.emplace_back(r.name, it->second);
      }
      md += fmt::format("\n### Slice: {}\n\n{}", slice, metrics_markdown(cols));
    }
  }
  if (!vmmgr_rows.empty()) md += "\n## Make, model and generation accuracy\n\n" + vmmgr_markdown(vmmgr_rows);
  for (const auto& r : summary.runs) {
    if (!r.modification) continue;
    std::vector<ReportColumn> cols;
    if (r.modification->unmodified) cols.emplace_back("Unmodified", *r.modification->unmodified);
    if (r.modification->modified) cols.emplace_back("Modified", *r.modification->modified);
    md += fmt::format("\n## Modification split ({})\n\n", r.name);
    if (r.modification->pct_unmodified) {
      md += fmt::format("Unmodified share: {:.2f}%\n\n", 100.0 * *r.modification->pct_unmodified);
    }
    if (!cols.empty()) md += metrics_markdown(cols);
  }
  for (const auto& r : summary.runs) {
    md += fmt::format("\n## Label suspects ({}, threshold {:.2f})\n\n{}", r.name, options.suspect_threshold,
                      suspects_markdown(r.suspects));
  }

  std::string csv = metrics_csv(columns);
  if (!vmmgr_rows.empty()) csv += "\n" + vmmgr_csv(vmmgr_rows);

  const fs::path json_path = output_dir / (options.report_stem + ".json");
  const fs::path md_path = output_dir / (options.report_stem + ".md");
  const fs::path csv_path = output_dir / (options.report_stem + ".csv");
  write_file(json_path, report.dump(2) + "\n");
  write_file(md_path, md);
  write_file(csv_path, csv);
  summary.written = {json_path, md_path, csv_path};
  log << fmt::format("[eval] {} run(s) scored, report at {}\n", summary.runs.size(), md_path.string());
  return summary;
}

AblationSummary cmd_ablate(const RunConfig& base, const std::vector<PromptVariant>& variants,
                           const std::optional<fs::path>& table_path, const EvalOptions& eval_options, std::ostream& log,
                           Clock* clock, const std::function<std::unique_ptr<Backend>()>& backend_factory) {
  base.validate();
  std::vector<PromptVariant> ordered;
  for (const auto v : k_all_variants) {
    if (std::find(variants.begin(), variants.end(), v) != variants.end()) ordered.push_back(v);
  }
  if (ordered.empty()) throw ConfigError("no prompt variants selected");
  if (!base.dry_run && !backend_factory) make_backend(base.backend);

  AblationSummary summary;
  std::vector<fs::path> artifacts;
  if (table_path && !base.dry_run) {
    artifacts.push_back(
        cmd_baseline(base.manifest_path, *table_path, base.output_dir, eval_options.range_filter_m, log).artifact);
  }
  for (const auto v : ordered) {
    RunConfig cfg = base;
    cfg.prompt_variant = v;
    cfg.cache_dir = base.effective_cache_dir();
    try {
      auto result = cmd_infer(cfg, log, clock, backend_factory ? backend_factory() : nullptr);
      if (!result.ok()) {
        log << fmt::format("[ablate] {}: {} track(s) failed\n", to_string(v), result.failures.size());
      }
      if (!base.dry_run) artifacts.push_back(result.artifact);
      summary.runs.emplace_back(v, std::move(result));
    } catch (const Error& e) {
      log << fmt::format("[ablate] {} failed: {}\n", to_string(v), e.what());
      summary.failed_variants.emplace_back(v, e.what());
    }
  }
  if (base.dry_run || artifacts.empty()) return summary;

  EvalOptions opts = eval_options;
  opts.report_stem = "ablation";
  if (artifacts.size() == 1) {
    try {
      summary.evaluation = cmd_eval(artifacts, base.manifest_path, base.output_dir, opts, log);
    } catch (const Error& e) {
      log << fmt::format("[ablate] evaluation failed: {}\n", e.what());
    }
  } else {
    summary.evaluation = cmd_eval(artifacts, base.manifest_path, base.output_dir, opts, log);
  }
  return summary;
}

fs::path default_size_class_table() {
  const fs::path name = "size_classes_2013.json";
#ifdef DIMSEED_SOURCE_DATA_DIR
  if (fs::exists(fs::path(DIMSEED_SOURCE_DATA_DIR) / name)) return fs::path(DIMSEED_SOURCE_DATA_DIR) / name;
#endif
#ifdef DIMSEED_INSTALL_DATA_DIR
  if (fs::exists(fs::path(DIMSEED_INSTALL_DATA_DIR) / name)) return fs::path(DIMSEED_INSTALL_DATA_DIR) / name;
#endif
  return name;
}

}  // namespace dimseed::cli
