#pragma once

#include <memory>
#include <string>

#include "kge/matchers.hpp"
#include "kge/source_systems.hpp"

namespace kge {

// Parsed service endpoint, e.g. "http://host:8080/v1".
struct Endpoint {
  std::string base;         // scheme://host[:port], handed to the HTTP client
  std::string path_prefix;  // "" or "/v1"
};

Endpoint parse_endpoint(const std::string& url);  // throws ConfigError

// Reads KGE_MT_ENDPOINT / KGE_WS_ENDPOINT / KGE_LLM_ENDPOINT.
std::string endpoint_from_env(SourceKind kind);
// Reads KGE_API_KEY_MT / KGE_API_KEY_WS / KGE_API_KEY_LLM; empty when unset.
std::string api_key_from_env(SourceKind kind);

// POST {prefix}/translate {"text", "source", "target"} -> {"text"}.
class HttpMtClient final : public MtClient {
 public:
  HttpMtClient(std::string engine, const std::string& endpoint, std::string api_key = "");
  const std::string& engine() const override { return engine_; }
  std::string translate(const std::string& text, const LanguageTag& source,
                        const LanguageTag& target) override;

 private:
  std::string engine_;
  Endpoint endpoint_;
  std::string api_key_;
};

// GET {prefix}/search?q=...&lang=... -> {"pages": [html, ...]}.
class HttpWsClient final : public WsClient {
 public:
  HttpWsClient(std::string engine, const std::string& endpoint, std::string api_key = "");
  const std::string& engine() const override { return engine_; }
  std::vector<std::string> search(const std::string& query,
                                  const LanguageTag& lang) override;

 private:
  std::string engine_;
  Endpoint endpoint_;
  std::string api_key_;
};

// POST {prefix}/complete {"prompt"} -> {"text"}.
class HttpLlmClient final : public LlmClient {
 public:
  HttpLlmClient(std::string engine, const std::string& endpoint, std::string api_key = "");
  const std::string& engine() const override { return engine_; }
  std::string complete(const std::string& prompt) override;

 private:
  std::string engine_;
  Endpoint endpoint_;
  std::string api_key_;
};

// POST {prefix}/embed {"text"} -> {"vector": [f, ...]}. Endpoint defaults to
// KGE_EMBED_ENDPOINT.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string name, const std::string& endpoint, int dim,
                        std::string api_key = "");
  const std::string& name() const override { return name_; }
  int dim() const override { return dim_; }
  std::vector<double> embed(const std::string& text) override;

 private:
  std::string name_;
  Endpoint endpoint_;
  int dim_;
  std::string api_key_;
};

}  // namespace kge
