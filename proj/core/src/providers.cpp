// HTTP wire formats for the chat-completion providers.

#include <httplib.h>

#include <chrono>
#include <cstdlib>

#include "conjoint/error.hpp"
#include "conjoint/respondent.hpp"
#include "json_io.hpp"

namespace conjoint {

namespace {

using detail::Json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::configuration, "endpoint url '" + url + "' has no scheme");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_begin);
  if (path_begin != std::string::npos) {
    e.prefix = url.substr(path_begin);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  }
  return e;
}

std::string default_origin(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::openai_compatible: return "https://api.openai.com";
    case ProviderKind::anthropic: return "https://api.anthropic.com";
    case ProviderKind::gemini: return "https://generativelanguage.googleapis.com";
    case ProviderKind::synthetic: break;
  }
  throw Error(ErrorCode::configuration, "synthetic provider has no endpoint");
}

struct WireRequest {
  std::string path;
  httplib::Headers headers;
  Json body;
};

WireRequest build_request(std::string_view prompt, const ModelConfig& config, const std::string& key) {
  WireRequest w;
  switch (config.provider) {
    case ProviderKind::openai_compatible:
      w.path = "/v1/chat/completions";
      w.headers = {{"Authorization", "Bearer " + key}};
      w.body = {{"model", config.model_name},
                {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})},
                {"temperature", config.temperature},
                {"max_tokens", config.max_output_tokens}};
      if (config.seed) w.body["seed"] = *config.seed;
      break;
    case ProviderKind::anthropic:
      w.path = "/v1/messages";
      w.headers = {{"x-api-key", key}, {"anthropic-version", "2023-06-01"}};
      w.body = {{"model", config.model_name},
                {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})},
                {"temperature", config.temperature},
                {"max_tokens", config.max_output_tokens}};
      break;
    case ProviderKind::gemini:
      w.path = "/v1beta/models/" + config.model_name + ":generateContent";
      w.headers = {{"x-goog-api-key", key}};
      w.body = {{"contents", Json::array({{{"role", "user"},
                                           {"parts", Json::array({{{"text", prompt}}})}}})},
                {"generationConfig",
                 {{"temperature", config.temperature}, {"maxOutputTokens", config.max_output_tokens}}}};
      break;
    case ProviderKind::synthetic:
      throw Error(ErrorCode::configuration, "synthetic provider is not queried over HTTP");
  }
  return w;
}

[[noreturn]] void protocol_error(ProviderKind kind, const std::string& what) {
  throw Error(ErrorCode::protocol, std::string(to_string(kind)) + " response: " + what);
}

void decode_openai(const Json& j, RawResponse& r) {
  const auto& choices = j.at("choices");
  if (!choices.is_array() || choices.empty()) protocol_error(ProviderKind::openai_compatible, "no choices");
  const auto& choice = choices.at(0);
  const auto& message = choice.at("message");
  if (auto c = message.find("content"); c != message.end() && c->is_string()) r.text = c->get<std::string>();
  const std::string reason = choice.value("finish_reason", std::string{});
  const bool refused = message.contains("refusal") && !message["refusal"].is_null();
  if (refused || reason == "content_filter") {
    r.finish_status = FinishStatus::refused_by_api;
    if (refused && r.text.empty()) r.text = message["refusal"].get<std::string>();
  } else if (reason == "length") {
    r.finish_status = FinishStatus::truncated;
  } else {
    r.finish_status = FinishStatus::complete;
  }
  r.provider_metadata["finish_reason"] = reason;
  if (j.contains("id")) r.provider_metadata["response_id"] = j["id"].get<std::string>();
  if (j.contains("model")) r.provider_metadata["model"] = j["model"].get<std::string>();
  if (auto f = j.find("system_fingerprint"); f != j.end() && f->is_string()) {
    r.provider_metadata["system_fingerprint"] = f->get<std::string>();
  }
  if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
    r.provider_metadata["prompt_tokens"] = std::to_string(u->value("prompt_tokens", 0));
    r.provider_metadata["output_tokens"] = std::to_string(u->value("completion_tokens", 0));
  }
}

void decode_anthropic(const Json& j, RawResponse& r) {
  const auto& content = j.at("content");
  if (!content.is_array()) protocol_error(ProviderKind::anthropic, "content is not an array");
  for (const auto& block : content) {
    if (block.value("type", std::string{}) == "text") r.text += block.at("text").get<std::string>();
  }
  const std::string reason = j.value("stop_reason", std::string{});
  if (reason == "max_tokens") {
    r.finish_status = FinishStatus::truncated;
  } else if (reason == "refusal") {
    r.finish_status = FinishStatus::refused_by_api;
  } else {
    r.finish_status = FinishStatus::complete;
  }
  r.provider_metadata["finish_reason"] = reason;
  if (j.contains("id")) r.provider_metadata["response_id"] = j["id"].get<std::string>();
  if (j.contains("model")) r.provider_metadata["model"] = j["model"].get<std::string>();
  if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
    r.provider_metadata["prompt_tokens"] = std::to_string(u->value("input_tokens", 0));
    r.provider_metadata["output_tokens"] = std::to_string(u->value("output_tokens", 0));
  }
}

void decode_gemini(const Json& j, RawResponse& r) {
  if (auto fb = j.find("promptFeedback"); fb != j.end() && fb->contains("blockReason")) {
    r.finish_status = FinishStatus::refused_by_api;
    r.provider_metadata["finish_reason"] = (*fb)["blockReason"].get<std::string>();
    return;
  }
  const auto& candidates = j.at("candidates");
  if (!candidates.is_array() || candidates.empty()) protocol_error(ProviderKind::gemini, "no candidates");
  const auto& cand = candidates.at(0);
  if (auto c = cand.find("content"); c != cand.end()) {
    for (const auto& part : c->value("parts", Json::array())) {
      if (part.contains("text")) r.text += part["text"].get<std::string>();
    }
  }
  const std::string reason = cand.value("finishReason", std::string{});
  if (reason == "MAX_TOKENS") {
    r.finish_status = FinishStatus::truncated;
  } else if (reason == "SAFETY" || reason == "RECITATION" || reason == "BLOCKLIST" ||
             reason == "PROHIBITED_CONTENT" || reason == "SPII") {
    r.finish_status = FinishStatus::refused_by_api;
  } else {
    r.finish_status = FinishStatus::complete;
  }
  r.provider_metadata["finish_reason"] = reason;
  if (j.contains("modelVersion")) r.provider_metadata["model"] = j["modelVersion"].get<std::string>();
  if (auto u = j.find("usageMetadata"); u != j.end() && u->is_object()) {
    r.provider_metadata["prompt_tokens"] = std::to_string(u->value("promptTokenCount", 0));
    r.provider_metadata["output_tokens"] = std::to_string(u->value("candidatesTokenCount", 0));
  }
}

}  // namespace

RawResponse query(std::string_view prompt, const ModelConfig& config, std::string_view request_tag) {
  if (prompt.empty()) throw Error(ErrorCode::invalid_input, "prompt is empty");
  const std::string var(credential_env_var(config.provider));
  const char* key = var.empty() ? nullptr : std::getenv(var.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::configuration, "missing credential: set " + var);
  }

  const Endpoint endpoint = split_url(config.endpoint_url.value_or(default_origin(config.provider)));
  WireRequest wire = build_request(prompt, config, key);
  wire.headers.emplace("X-Request-Tag", std::string(request_tag));

  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(config.request_timeout);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(endpoint.prefix + wire.path, wire.headers, wire.body.dump(), "application/json");
  RawResponse r;
  r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  r.provider_metadata["provider"] = std::string(to_string(config.provider));
  r.provider_metadata["request_tag"] = std::string(request_tag);

  if (!res) {
    r.finish_status = FinishStatus::transport_error;
    r.provider_metadata["error"] = httplib::to_string(res.error());
    return r;
  }
  r.provider_metadata["http_status"] = std::to_string(res->status);
  if (res->status == 429 || res->status >= 500) {
    r.finish_status = FinishStatus::transport_error;
    return r;
  }
  if (res->status == 401 || res->status == 403) {
    throw Error(ErrorCode::configuration, std::string(to_string(config.provider)) +
                                              " rejected the credential (HTTP " +
                                              std::to_string(res->status) + ")");
  }
  if (res->status != 200) {
    protocol_error(config.provider, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
  }

  try {
    const Json j = Json::parse(res->body);
    switch (config.provider) {
      case ProviderKind::openai_compatible: decode_openai(j, r); break;
      case ProviderKind::anthropic: decode_anthropic(j, r); break;
      case ProviderKind::gemini: decode_gemini(j, r); break;
      case ProviderKind::synthetic: break;
    }
  } catch (const nlohmann::json::exception& e) {
    protocol_error(config.provider, e.what());
  }
  if (r.finish_status == FinishStatus::complete && r.text.empty()) {
    protocol_error(config.provider, "complete response with empty text");
  }
  return r;
}

}  // namespace conjoint
