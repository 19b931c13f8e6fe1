#include "kge/http_adapters.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "kge/errors.hpp"

namespace kge {

using nlohmann::json;

namespace {

constexpr auto kConnectTimeout = std::chrono::seconds(5);
constexpr auto kReadTimeout = std::chrono::seconds(60);

std::string url_encode(std::string_view value) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(value.size());
  for (unsigned char c : value) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
        c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

httplib::Headers auth_headers(const std::string& api_key) {
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  return headers;
}

// One connection per request; adapters stay safe for concurrent use.
json post_json(const Endpoint& endpoint, const std::string& api_key,
               const std::string& path, const json& body) {
  httplib::Client client(endpoint.base);
  client.set_connection_timeout(kConnectTimeout);
  client.set_read_timeout(kReadTimeout);

  auto result = client.Post(endpoint.path_prefix + path, auth_headers(api_key),
                            body.dump(), "application/json");
  if (!result) {
    throw TransportError("POST " + endpoint.base + endpoint.path_prefix + path + ": " +
                         httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw TransportError("POST " + endpoint.base + endpoint.path_prefix + path +
                         ": HTTP " + std::to_string(result->status));
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed response body: ") + e.what());
  }
}

json get_json(const Endpoint& endpoint, const std::string& api_key, const std::string& path) {
  httplib::Client client(endpoint.base);
  client.set_connection_timeout(kConnectTimeout);
  client.set_read_timeout(kReadTimeout);

  auto result = client.Get(endpoint.path_prefix + path, auth_headers(api_key));
  if (!result) {
    throw TransportError("GET " + endpoint.base + endpoint.path_prefix + path + ": " +
                         httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw TransportError("GET " + endpoint.base + endpoint.path_prefix + path + ": HTTP " +
                         std::to_string(result->status));
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed response body: ") + e.what());
  }
}

std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value ? value : "";
}

}  // namespace

Endpoint parse_endpoint(const std::string& url) {
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos ||
      (url.substr(0, scheme_end) != "http" && url.substr(0, scheme_end) != "https")) {
    throw ConfigError("endpoint must be an http(s) URL: \"" + url + "\"");
  }
  std::size_t authority_start = scheme_end + 3;
  if (authority_start >= url.size()) {
    throw ConfigError("endpoint lacks a host: \"" + url + "\"");
  }
  std::size_t path_start = url.find('/', authority_start);

  Endpoint endpoint;
  if (path_start == std::string::npos) {
    endpoint.base = url;
  } else {
    endpoint.base = url.substr(0, path_start);
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    endpoint.path_prefix = prefix;
  }
  return endpoint;
}

std::string endpoint_from_env(SourceKind kind) {
  switch (kind) {
    case SourceKind::MT:
      return env_or_empty("KGE_MT_ENDPOINT");
    case SourceKind::WS:
      return env_or_empty("KGE_WS_ENDPOINT");
    case SourceKind::LLM:
      return env_or_empty("KGE_LLM_ENDPOINT");
  }
  return "";
}

std::string api_key_from_env(SourceKind kind) {
  switch (kind) {
    case SourceKind::MT:
      return env_or_empty("KGE_API_KEY_MT");
    case SourceKind::WS:
      return env_or_empty("KGE_API_KEY_WS");
    case SourceKind::LLM:
      return env_or_empty("KGE_API_KEY_LLM");
  }
  return "";
}

HttpMtClient::HttpMtClient(std::string engine, const std::string& endpoint,
                           std::string api_key)
    : engine_(std::move(engine)),
      endpoint_(parse_endpoint(endpoint)),
      api_key_(std::move(api_key)) {}

std::string HttpMtClient::translate(const std::string& text, const LanguageTag& source,
                                    const LanguageTag& target) {
  json body;
  body["text"] = text;
  body["source"] = source.code();
  body["target"] = target.code();
  json response = post_json(endpoint_, api_key_, "/translate", body);
  if (!response.contains("text") || !response.at("text").is_string()) {
    throw TransportError("translate response lacks \"text\"");
  }
  return response.at("text").get<std::string>();
}

HttpWsClient::HttpWsClient(std::string engine, const std::string& endpoint,
                           std::string api_key)
    : engine_(std::move(engine)),
      endpoint_(parse_endpoint(endpoint)),
      api_key_(std::move(api_key)) {}

std::vector<std::string> HttpWsClient::search(const std::string& query,
                                              const LanguageTag& lang) {
  const std::string path = "/search?q=" + url_encode(query) + "&lang=" + lang.code();
  json response = get_json(endpoint_, api_key_, path);
  if (!response.contains("pages") || !response.at("pages").is_array()) {
    throw TransportError("search response lacks \"pages\"");
  }
  std::vector<std::string> pages;
  for (const auto& page : response.at("pages")) {
    if (page.is_string()) pages.push_back(page.get<std::string>());
  }
  return pages;
}

HttpLlmClient::HttpLlmClient(std::string engine, const std::string& endpoint,
                             std::string api_key)
    : engine_(std::move(engine)),
      endpoint_(parse_endpoint(endpoint)),
      api_key_(std::move(api_key)) {}

std::string HttpLlmClient::complete(const std::string& prompt) {
  json body;
  body["prompt"] = prompt;
  json response = post_json(endpoint_, api_key_, "/complete", body);
  if (!response.contains("text") || !response.at("text").is_string()) {
    throw TransportError("complete response lacks \"text\"");
  }
  return response.at("text").get<std::string>();
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string name, const std::string& endpoint,
                                             int dim, std::string api_key)
    : name_(std::move(name)),
      endpoint_(parse_endpoint(endpoint)),
      dim_(dim),
      api_key_(std::move(api_key)) {}

std::vector<double> HttpEmbeddingProvider::embed(const std::string& text) {
  json body;
  body["text"] = text;
  json response;
  try {
    response = post_json(endpoint_, api_key_, "/embed", body);
  } catch (const TransportError& e) {
    throw MatcherError(e.what());
  }
  if (!response.contains("vector") || !response.at("vector").is_array()) {
    throw MatcherError("embed response lacks \"vector\"");
  }
  std::vector<double> vec;
  vec.reserve(response.at("vector").size());
  for (const auto& item : response.at("vector")) {
    if (!item.is_number()) throw MatcherError("embed vector entries must be numbers");
    double v = item.get<double>();
    if (!std::isfinite(v)) throw MatcherError("embed vector entries must be finite");
    vec.push_back(v);
  }
  if (dim_ > 0 && vec.size() != static_cast<std::size_t>(dim_)) {
    throw MatcherError("embed vector has dimension " + std::to_string(vec.size()) +
                       ", expected " + std::to_string(dim_));
  }
  return vec;
}

}  // namespace kge
