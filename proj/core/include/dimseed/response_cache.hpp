#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>

namespace dimseed {

struct ImageBlob {
  std::string bytes;
  std::string mime_type = "image/jpeg";
};

/// Lowercase hex SHA-256 of the length-prefixed (model, system text, user
/// text, images...) tuple.
std::string cache_key(std::string_view model_name, std::string_view system_text, std::string_view user_text,
                      std::span<const ImageBlob> images);

std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view data);

/// Content-addressed store of raw completions:
/// <root>/<model_name>/<first-2-hex>/<key>.json
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);

  std::optional<std::string> get(std::string_view model_name, const std::string& key) const;
  void put(std::string_view model_name, const std::string& key, std::string_view raw_text);
  std::filesystem::path path_for(std::string_view model_name, const std::string& key) const;

 private:
  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
};

}  // namespace dimseed
