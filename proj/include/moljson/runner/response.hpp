#pragma once

#include <string>

#include "moljson/moljson.hpp"

namespace moljson {

/// One model answer as persisted by the runner.
struct ModelResponse {
  std::string task_id;
  std::string model;
  std::string raw_text;
  long long output_tokens = 0;
  long long latency_ms = 0;
  int attempts = 0;
  std::string error;  // empty on success
  Json provider_meta = Json::object();
};

inline Json response_to_json(const ModelResponse &r) {
  Json j = Json::object();
  j["task_id"] = r.task_id;
  j["model"] = r.model;
  j["raw_text"] = r.raw_text;
  j["output_tokens"] = r.output_tokens;
  j["latency_ms"] = r.latency_ms;
  j["attempts"] = r.attempts;
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.provider_meta.empty()) j["provider_meta"] = r.provider_meta;
  return j;
}

inline ModelResponse response_from_json(const Json &j) {
  ModelResponse r;
  r.task_id = j.at("task_id").get<std::string>();
  r.model = j.value("model", std::string());
  r.raw_text = j.value("raw_text", std::string());
  r.output_tokens = j.value("output_tokens", 0LL);
  r.latency_ms = j.value("latency_ms", 0LL);
  r.attempts = j.value("attempts", 0);
  if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
  if (j.contains("provider_meta")) r.provider_meta = j["provider_meta"];
  return r;
}

}  // namespace moljson
