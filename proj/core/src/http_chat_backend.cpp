// Project headers first: httplib pulls in <resolv.h>, whose `_res` macro
// breaks Eigen if Eigen is parsed afterwards.
#include "dimseed/backends.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace dimseed {

using json = nlohmann::json;

namespace {

constexpr int k_anthropic_max_tokens = 4096;

bool retryable_status(int status) {
  return status == 408 || status == 409 || status == 425 || status == 429 || status >= 500;
}

std::optional<double> retry_after(const httplib::Result& res) {
  if (!res->has_header("Retry-After")) return std::nullopt;
  const std::string value = res->get_header_value("Retry-After");
  char* end = nullptr;
  const double seconds = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || seconds < 0) return std::nullopt;
  return seconds;
}

std::string snippet(std::string_view body) {
  return std::string(body.substr(0, 200));
}

}  // namespace

HttpChatBackend::HttpChatBackend(const BackendConfig& config)
    : model_name_(config.model_name), dialect_(config.dialect), timeout_s_(config.timeout_s) {
  if (!config.endpoint_url) throw ConfigError("http_chat backend requires endpoint_url");
  const std::string& url = *config.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError(fmt::format("endpoint_url '{}' lacks a scheme", url));
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);

  if (!config.api_key_env) throw ConfigError("http_chat backend requires api_key_env");
  const char* key = std::getenv(config.api_key_env->c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError(fmt::format("environment variable '{}' is not set", *config.api_key_env));
  }
  api_key_ = key;
}

std::string HttpChatBackend::name() const {
  return fmt::format("http_chat:{}", dialect_ == ChatDialect::openai ? "openai" : "anthropic");
}

std::string HttpChatBackend::request_body(const BackendRequest& request) const {
  const PromptBundle& bundle = *request.bundle;
  json body;
  body["model"] = model_name_;
  if (dialect_ == ChatDialect::openai) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", bundle.user_text}});
    for (const auto& img : request.images) {
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + img.mime_type + ";base64," + base64_encode(img.bytes)}}}});
    }
    body["messages"] = json::array({{{"role", "system"}, {"content", bundle.system_text}},
                                    {{"role", "user"}, {"content", content}}});
  } else {
    json content = json::array();
    for (const auto& img : request.images) {
      content.push_back(
          {{"type", "image"},
           {"source", {{"type", "base64"}, {"media_type", img.mime_type}, {"data", base64_encode(img.bytes)}}}});
    }
    content.push_back({{"type", "text"}, {"text", bundle.user_text}});
    body["max_tokens"] = k_anthropic_max_tokens;
    body["system"] = bundle.system_text;
    body["messages"] = json::array({{{"role", "user"}, {"content", content}}});
  }
  return body.dump();
}

std::string HttpChatBackend::extract_text(std::string_view body) const {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw BackendUnavailable(fmt::format("unparseable provider response: {}", snippet(body)));
  }
  auto join_parts = [](const json& parts) {
    std::string out;
    for (const auto& part : parts) {
      if (part.is_object() && part.value("type", "") == "text" && part.contains("text")) {
        out += part["text"].get<std::string>();
      }
    }
    return out;
  };
  try {
    if (dialect_ == ChatDialect::openai) {
      const json& content = doc.at("choices").at(0).at("message").at("content");
      return content.is_string() ? content.get<std::string>() : join_parts(content);
    }
    return join_parts(doc.at("content"));
  } catch (const json::exception&) {
    throw BackendUnavailable(fmt::format("provider response lacks completion text: {}", snippet(body)));
  }
}

std::string HttpChatBackend::complete(const BackendRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(timeout_s_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers headers;
  if (dialect_ == ChatDialect::openai) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  } else {
    headers.emplace("x-api-key", api_key_);
    headers.emplace("anthropic-version", "2023-06-01");
  }

  const auto res = client.Post(path_, headers, request_body(request), "application/json");
  if (!res) throw TransientBackendError(fmt::format("transport error: {}", httplib::to_string(res.error())));
  if (res->status == 401 || res->status == 403) {
    throw AuthError(fmt::format("provider rejected credentials (HTTP {})", res->status));
  }
  if (retryable_status(res->status)) {
    throw TransientBackendError(fmt::format("HTTP {}: {}", res->status, snippet(res->body)), retry_after(res));
  }
  if (res->status != 200) throw BackendUnavailable(fmt::format("HTTP {}: {}", res->status, snippet(res->body)));
  return extract_text(res->body);
}

}  // namespace dimseed
