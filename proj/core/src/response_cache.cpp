#include "dimseed/response_cache.hpp"

#include <array>
#include <cctype>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include "dimseed/errors.hpp"

namespace dimseed {

using json = nlohmann::json;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data) { EVP_DigestUpdate(ctx_, data.data(), data.size()); }
  void update_field(std::string_view data) {
    const auto n = static_cast<std::uint64_t>(data.size());
    std::array<unsigned char, 8> len{};
    for (int i = 0; i < 8; ++i) len[static_cast<std::size_t>(i)] = static_cast<unsigned char>(n >> (8 * i));
    EVP_DigestUpdate(ctx_, len.data(), len.size());
    update(data);
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int size = 0;
    EVP_DigestFinal_ex(ctx_, digest.data(), &size);
    std::string out;
    out.reserve(size * 2);
    for (unsigned int i = 0; i < size; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string safe_dir_name(std::string_view model_name) {
  std::string out;
  for (char c : model_name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string cache_key(std::string_view model_name, std::string_view system_text, std::string_view user_text,
                      std::span<const ImageBlob> images) {
  Sha256 h;
  h.update_field("dimseed-cache-v1");
  h.update_field(model_name);
  h.update_field(system_text);
  h.update_field(user_text);
  h.update_field(std::to_string(images.size()));
  for (const auto& img : images) {
    h.update_field(img.mime_type);
    h.update_field(img.bytes);
  }
  return h.hex();
}

std::string base64_encode(std::string_view data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path ResponseCache::path_for(std::string_view model_name, const std::string& key) const {
  return root_ / safe_dir_name(model_name) / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(std::string_view model_name, const std::string& key) const {
  std::shared_lock lock(mutex_);
  std::ifstream in(path_for(model_name, key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const json entry = json::parse(buffer.str(), nullptr, false);
  if (entry.is_discarded() || !entry.is_object() || entry.value("key", "") != key) return std::nullopt;
  auto it = entry.find("raw_text");
  if (it == entry.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

void ResponseCache::put(std::string_view model_name, const std::string& key, std::string_view raw_text) {
  static std::atomic<unsigned> counter{0};
  const auto target = path_for(model_name, key);
  json entry = {{"key", key}, {"model", std::string(model_name)}, {"raw_text", std::string(raw_text)}};

  std::unique_lock lock(mutex_);
  std::filesystem::create_directories(target.parent_path());
  auto tmp = target;
  tmp += fmt::format(".tmp{}", counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write cache entry '{}'", tmp.string()));
    out << entry.dump(2, ' ', false, json::error_handler_t::replace) << '\n';
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace dimseed
