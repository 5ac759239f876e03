#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "dimseed/errors.hpp"
#include "dimseed/promptkit.hpp"
#include "dimseed/response_cache.hpp"

namespace dimseed {

/// Retries exhausted, or a non-retryable provider failure.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

/// Credential rejected; never retried.
class AuthError : public Error {
 public:
  using Error::Error;
};

/// More images than the prompt bundle allows; raised before any request.
class OversizedInput : public Error {
 public:
  using Error::Error;
};

/// Thrown by backends for failures worth retrying (timeouts, 429, 5xx).
class TransientBackendError : public Error {
 public:
  explicit TransientBackendError(const std::string& what, std::optional<double> retry_after_s = std::nullopt)
      : Error(what), retry_after_s_(retry_after_s) {}
  std::optional<double> retry_after_s() const noexcept { return retry_after_s_; }

 private:
  std::optional<double> retry_after_s_;
};

enum class BackendKind { http_chat, replay, fixed_stub };
enum class ChatDialect { openai, anthropic };

std::string_view to_string(BackendKind kind) noexcept;

struct BackendConfig {
  BackendKind backend_kind = BackendKind::replay;
  ChatDialect dialect = ChatDialect::openai;
  std::optional<std::string> endpoint_url;
  std::string model_name = "replay";
  std::optional<std::string> api_key_env;
  std::optional<std::filesystem::path> fixture_path;
  std::string stub_text;
  int max_parallel = 4;
  int requests_per_minute = 60;
  int max_retries = 3;
  double timeout_s = 120.0;
  double backoff_base_s = 1.0;
  double backoff_factor = 2.0;

  /// Throws ConfigError describing the first violated requirement.
  void validate() const;

  /// Reads the JSON config layout; relative fixture paths resolve against
  /// `base_dir`.
  static BackendConfig from_json_text(std::string_view text, const std::filesystem::path& base_dir = {});
  static BackendConfig load(const std::filesystem::path& path);
};

struct BackendRequest {
  std::string track_id;
  const PromptBundle* bundle = nullptr;
  std::span<const ImageBlob> images;
  std::string model_name;
  std::string cache_key;
};

class Backend {
 public:
  virtual ~Backend() = default;
  /// Returns the completion text or throws TransientBackendError,
  /// AuthError or BackendUnavailable.
  virtual std::string complete(const BackendRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Serves stored completions. Fixture lines are {"key": ..., "raw_text": ...}
/// where key is either a cache key or "<track_id>:<variant>".
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(const std::filesystem::path& fixture_path);
  explicit ReplayBackend(std::map<std::string, std::string> entries);

  std::string complete(const BackendRequest& request) override;
  std::string name() const override { return "replay"; }
  std::size_t size() const noexcept { return entries_.size(); }

  static std::string track_key(std::string_view track_id, PromptVariant variant);

 private:
  std::map<std::string, std::string> entries_;
};

/// Returns the same text for every request.
class FixedStubBackend final : public Backend {
 public:
  explicit FixedStubBackend(std::string text) : text_(std::move(text)) {}
  std::string complete(const BackendRequest&) override { return text_; }
  std::string name() const override { return "fixed_stub"; }

 private:
  std::string text_;
};

/// Chat-completion client over HTTP(S): a system message plus a user message
/// carrying the prompt text followed by base64 images.
class HttpChatBackend final : public Backend {
 public:
  /// Reads the credential from the environment variable named in the config;
  /// throws ConfigError if it is unset.
  explicit HttpChatBackend(const BackendConfig& config);

  std::string complete(const BackendRequest& request) override;
  std::string name() const override;

  /// Request body in the configured dialect; exposed for wire-format tests.
  std::string request_body(const BackendRequest& request) const;
  /// Extracts the completion text from a provider response body.
  std::string extract_text(std::string_view body) const;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  std::string model_name_;
  ChatDialect dialect_;
  double timeout_s_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace dimseed
