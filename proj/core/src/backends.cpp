#include "dimseed/backends.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace dimseed {

using json = nlohmann::json;

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::http_chat: return "http_chat";
    case BackendKind::replay: return "replay";
    case BackendKind::fixed_stub: return "fixed_stub";
  }
  return "replay";
}

void BackendConfig::validate() const {
  if (model_name.empty()) throw ConfigError("backend model_name is empty");
  if (max_parallel < 1) throw ConfigError("max_parallel must be >= 1");
  if (requests_per_minute < 1) throw ConfigError("requests_per_minute must be >= 1");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout_s must be positive");
  if (backoff_base_s < 0.0 || backoff_factor < 1.0) throw ConfigError("invalid backoff settings");
  switch (backend_kind) {
    case BackendKind::http_chat:
      if (!endpoint_url || endpoint_url->empty()) throw ConfigError("http_chat backend requires endpoint_url");
      if (!api_key_env || api_key_env->empty()) throw ConfigError("http_chat backend requires api_key_env");
      break;
    case BackendKind::replay:
      if (!fixture_path) throw ConfigError("replay backend requires fixture_path");
      break;
    case BackendKind::fixed_stub:
      break;
  }
}

BackendConfig BackendConfig::from_json_text(std::string_view text, const std::filesystem::path& base_dir) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("backend config must be a JSON object");
  BackendConfig cfg;
  try {
    const std::string kind = doc.value("backend_kind", std::string(to_string(cfg.backend_kind)));
    if (kind == "http_chat") {
      cfg.backend_kind = BackendKind::http_chat;
    } else if (kind == "replay") {
      cfg.backend_kind = BackendKind::replay;
    } else if (kind == "fixed_stub") {
      cfg.backend_kind = BackendKind::fixed_stub;
    } else {
      throw ConfigError(fmt::format("unknown backend_kind '{}'", kind));
    }
    const std::string dialect = doc.value("dialect", std::string("openai"));
    if (dialect == "openai") {
      cfg.dialect = ChatDialect::openai;
    } else if (dialect == "anthropic") {
      cfg.dialect = ChatDialect::anthropic;
    } else {
      throw ConfigError(fmt::format("unknown dialect '{}'", dialect));
    }
    if (doc.contains("endpoint_url") && !doc["endpoint_url"].is_null()) cfg.endpoint_url = doc["endpoint_url"];
    if (doc.contains("api_key_env") && !doc["api_key_env"].is_null()) cfg.api_key_env = doc["api_key_env"];
    if (doc.contains("fixture_path") && !doc["fixture_path"].is_null()) {
      std::filesystem::path p = doc["fixture_path"].get<std::string>();
      cfg.fixture_path = p.is_absolute() ? p : base_dir / p;
    }
    if (doc.contains("api_key")) throw ConfigError("credentials must come from api_key_env, not the config file");
    cfg.model_name = doc.value("model_name", cfg.model_name);
    cfg.stub_text = doc.value("stub_text", cfg.stub_text);
    cfg.max_parallel = doc.value("max_parallel", cfg.max_parallel);
    cfg.requests_per_minute = doc.value("requests_per_minute", cfg.requests_per_minute);
    cfg.max_retries = doc.value("max_retries", cfg.max_retries);
    cfg.timeout_s = doc.value("timeout_s", cfg.timeout_s);
    cfg.backoff_base_s = doc.value("backoff_base_s", cfg.backoff_base_s);
    cfg.backoff_factor = doc.value("backoff_factor", cfg.backoff_factor);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("backend config: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

BackendConfig BackendConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open backend config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), path.parent_path());
}

ReplayBackend::ReplayBackend(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

ReplayBackend::ReplayBackend(const std::filesystem::path& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in) throw ConfigError(fmt::format("cannot open replay fixture '{}'", fixture_path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json entry = json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.is_object() || !entry.contains("key") || !entry["key"].is_string() ||
        !entry.contains("raw_text") || !entry["raw_text"].is_string()) {
      throw ConfigError(fmt::format("{}:{}: malformed replay entry", fixture_path.string(), line_no));
    }
    entries_[entry["key"].get<std::string>()] = entry["raw_text"].get<std::string>();
  }
}

std::string ReplayBackend::track_key(std::string_view track_id, PromptVariant variant) {
  return fmt::format("{}:{}", track_id, to_string(variant));
}

std::string ReplayBackend::complete(const BackendRequest& request) {
  if (auto it = entries_.find(request.cache_key); it != entries_.end()) return it->second;
  if (request.bundle != nullptr) {
    if (auto it = entries_.find(track_key(request.track_id, request.bundle->variant)); it != entries_.end()) {
      return it->second;
    }
  }
  throw BackendUnavailable(fmt::format("no replay entry for track '{}'", request.track_id));
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  switch (config.backend_kind) {
    case BackendKind::http_chat: return std::make_unique<HttpChatBackend>(config);
    case BackendKind::replay: return std::make_unique<ReplayBackend>(*config.fixture_path);
    case BackendKind::fixed_stub: return std::make_unique<FixedStubBackend>(config.stub_text);
  }
  throw ConfigError("unsupported backend kind");
}

}  // namespace dimseed
