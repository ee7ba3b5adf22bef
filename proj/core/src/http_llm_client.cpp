#include <cstdlib>

#include <httplib.h>

#include "tbsynth/llm_client.hpp"

namespace tbsynth {

using nlohmann::json;

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw BackendUnavailable("LLM endpoint needs a scheme: " + endpoint);
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

constexpr const char* kSystemPrompt =
    "You are a hardware verification assistant. You only ever answer with a single JSON document.";

}  // namespace

HttpLlmClient::HttpLlmClient(HttpLlmConfig config) : config_(std::move(config)) {}

HttpLlmClient::Completion HttpLlmClient::complete(LlmTask, const std::string& prompt) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw BackendUnavailable("environment variable " + config_.api_key_env + " is not set");
  }
  const Url url = split_url(config_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.origin.rfind("https://", 0) == 0) {
    throw BackendUnavailable("https endpoints need a build with OpenSSL");
  }
#endif

  httplib::Client cli(url.origin);
  cli.set_connection_timeout(config_.timeout_seconds);
  cli.set_read_timeout(config_.timeout_seconds);
  cli.set_write_timeout(config_.timeout_seconds);
  cli.set_bearer_token_auth(key);

  const json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages", json::array({json{{"role", "system"}, {"content", kSystemPrompt}},
                                json{{"role", "user"}, {"content", prompt}}})},
  };
  auto res = cli.Post(url.path, body.dump(), "application/json");
  if (!res) {
    throw BackendUnavailable("LLM request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendUnavailable("LLM endpoint returned HTTP " + std::to_string(res->status));
  }

  json doc;
  try {
    doc = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw LlmResponseError(std::string("LLM endpoint returned non-JSON body: ") + e.what());
  }
  const auto* content = [&]() -> const json* {
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) return nullptr;
    const auto& c = doc["choices"][0];
    if (!c.contains("message") || !c["message"].contains("content")) return nullptr;
    const auto& m = c["message"]["content"];
    return m.is_string() ? &m : nullptr;
  }();
  if (content == nullptr) throw LlmResponseError("LLM response has no choices[0].message.content");

  Completion out;
  out.text = content->get<std::string>();
  if (doc.contains("usage") && doc["usage"].is_object()) {
    const auto& u = doc["usage"];
    if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_unsigned()) {
      out.input_tokens = u["prompt_tokens"].get<std::uint64_t>();
    }
    if (u.contains("completion_tokens") && u["completion_tokens"].is_number_unsigned()) {
      out.output_tokens = u["completion_tokens"].get<std::uint64_t>();
    }
  }
  return out;
}

}  // namespace tbsynth
