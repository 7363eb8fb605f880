#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <cstdlib>
#include <string>

#include "moljson/runner/runner.hpp"

namespace moljson {

namespace detail {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline Endpoint split_url(const std::string &url) {
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

inline std::string api_key(const ProviderConfig &cfg, const char *fallback_env) {
  const std::string var = cfg.api_key_env.empty() ? fallback_env : cfg.api_key_env;
  const char *v = std::getenv(var.c_str());
  if (!v || !*v) throw Error(ErrorKind::ProviderError, "environment variable " + var + " is not set");
  return v;
}

inline Json post_json(const ProviderConfig &cfg, const std::string &default_url, const httplib::Headers &headers,
                      const Json &body) {
  Endpoint ep = split_url(cfg.endpoint.empty() ? default_url : cfg.endpoint);
  httplib::Client cli(ep.base);
  cli.set_read_timeout(600, 0);
  cli.set_connection_timeout(30, 0);
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorKind::ProviderError, "transport: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorKind::ProviderError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
  Json j = Json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::ProviderError, "unparseable provider reply");
  return j;
}

}  // namespace detail

/// OpenAI Responses wire format with a json_schema text format.
class OpenAIResponsesProvider : public Provider {
 public:
  explicit OpenAIResponsesProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {}

  ProviderReply complete(const ProviderRequest &req) override {
    Json body = Json::object();
    body["model"] = cfg_.model;
    body["input"] = Json::array({Json{{"role", "user"}, {"content", req.prompt}}});
    body["reasoning"] = Json{{"effort", cfg_.reasoning_effort}};
    body["max_output_tokens"] = cfg_.max_output_tokens;
    body["text"] = Json{{"format", Json{{"type", "json_schema"}, {"name", "answer"}, {"schema", req.schema}}}};
    httplib::Headers h{{"Authorization", "Bearer " + detail::api_key(cfg_, "OPENAI_API_KEY")}};
    Json j = detail::post_json(cfg_, "https://api.openai.com/v1/responses", h, body);
    ProviderReply rep;
    if (j.contains("output") && j["output"].is_array())
      for (const Json &item : j["output"])
        if (item.value("type", "") == "message" && item.contains("content"))
          for (const Json &c : item["content"])
            if (c.value("type", "") == "output_text") rep.text += c.value("text", "");
    if (j.contains("usage")) rep.output_tokens = j["usage"].value("output_tokens", 0LL);
    rep.meta = Json{{"id", j.value("id", "")}, {"status", j.value("status", "")}};
    return rep;
  }

 private:
  ProviderConfig cfg_;
};

/// Anthropic Messages wire format with structured outputs and extended
/// thinking. Schemas must be the enum-ranges variant.
class AnthropicMessagesProvider : public Provider {
 public:
  explicit AnthropicMessagesProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {}

  ProviderReply complete(const ProviderRequest &req) override {
    Json body = Json::object();
    body["model"] = cfg_.model;
    body["max_tokens"] = cfg_.max_output_tokens;
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", req.prompt}}});
    if (cfg_.thinking_budget > 0)
      body["thinking"] = Json{{"type", "enabled"}, {"budget_tokens", cfg_.thinking_budget}};
    Json schema = req.schema == emit_schema(SchemaVariant::Standard) ? emit_schema(SchemaVariant::EnumRanges) : req.schema;
    body["output_format"] = Json{{"type", "json_schema"}, {"schema", schema}};
    httplib::Headers h{{"x-api-key", detail::api_key(cfg_, "ANTHROPIC_API_KEY")},
                       {"anthropic-version", "2023-06-01"},
                       {"anthropic-beta", "structured-outputs-2025-11-13"}};
    Json j = detail::post_json(cfg_, "https://api.anthropic.com/v1/messages", h, body);
    ProviderReply rep;
    if (j.contains("content") && j["content"].is_array())
      for (const Json &c : j["content"])
        if (c.value("type", "") == "text") rep.text += c.value("text", "");
    if (j.contains("usage")) rep.output_tokens = j["usage"].value("output_tokens", 0LL);
    rep.meta = Json{{"id", j.value("id", "")}, {"stop_reason", j.value("stop_reason", "")}};
    return rep;
  }

 private:
  ProviderConfig cfg_;
};

inline std::unique_ptr<Provider> make_provider(const ProviderConfig &cfg) {
  cfg.validate();
  if (cfg.kind == ProviderKind::Replay) return std::make_unique<ReplayProvider>(cfg.fixtures_path);
  if (cfg.provider == "anthropic") return std::make_unique<AnthropicMessagesProvider>(cfg);
  if (cfg.provider == "openai") return std::make_unique<OpenAIResponsesProvider>(cfg);
  throw Error(ErrorKind::SchemaViolation, "unknown provider " + cfg.provider);
}

}  // namespace moljson
