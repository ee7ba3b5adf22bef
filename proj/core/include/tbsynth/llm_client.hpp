#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/error.hpp"

namespace tbsynth {

// The backend could not produce a response (missing scripted file, HTTP
// failure, missing API key).
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// The backend answered but the answer has the wrong shape.
class LlmResponseError : public Error {
 public:
  using Error::Error;
};

enum class LlmTask { kExtractBlueprint, kGenerateDsl, kProposeFix };
std::string_view to_string(LlmTask t);

struct TokenUsage {
  std::uint64_t calls = 0;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;

  bool operator==(const TokenUsage&) const = default;
};

class TokenLedger {
 public:
  void record(LlmTask task, std::uint64_t input_tokens, std::uint64_t output_tokens);
  TokenUsage total() const;
  TokenUsage for_task(LlmTask task) const;
  nlohmann::json to_json() const;

 private:
  std::map<LlmTask, TokenUsage> by_task_;
};

// Rough token count for backends that do not report usage.
std::uint64_t estimate_tokens(std::string_view text);

// One edit proposed by the compile-fix step. Either whole-file `content`, or
// a `search`/`replace` pair applied to the first occurrence.
struct FileEdit {
  std::string file;
  std::optional<std::string> content;
  std::string search;
  std::string replace;

  bool operator==(const FileEdit&) const = default;
};

// {"edits": [{"file": ..., "content": ...} | {"file": ..., "search": ..., "replace": ...}]}
std::vector<FileEdit> parse_fix_response(std::string_view text);  // throws LlmResponseError

// Removes a surrounding ```json fence if present.
std::string strip_code_fence(std::string_view text);

// File name and content, in the order they are shown to the model.
using NamedFiles = std::vector<std::pair<std::string, std::string>>;

// Prompt builders, shared by every backend.
std::string blueprint_prompt(std::string_view spec_text, const std::vector<std::string>& prior_errors);
std::string fix_prompt(std::string_view error_log, const NamedFiles& files);

class LlmClient {
 public:
  virtual ~LlmClient() = default;

  std::string extract_blueprint(std::string_view spec_text, const std::vector<std::string>& prior_errors = {});
  std::string generate_dsl(std::string_view gap_prompt);
  std::vector<FileEdit> propose_fix(std::string_view error_log, const NamedFiles& files);

  const TokenLedger& ledger() const { return ledger_; }

 protected:
  struct Completion {
    std::string text;
    std::optional<std::uint64_t> input_tokens;
    std::optional<std::uint64_t> output_tokens;
  };

  virtual Completion complete(LlmTask task, const std::string& prompt) = 0;

 private:
  std::string call(LlmTask task, const std::string& prompt);

  TokenLedger ledger_;
};

// Replays canned responses. Directory mode reads <dir>/blueprint_N.json,
// dsl_N.json and fix_N.json with N counting from 1 per task.
class ScriptedLlmClient : public LlmClient {
 public:
  explicit ScriptedLlmClient(std::filesystem::path dir);
  ScriptedLlmClient() = default;

  void push(LlmTask task, std::string response);

  struct Call {
    LlmTask task;
    std::string prompt;
  };
  const std::vector<Call>& calls() const { return calls_; }

  static std::string file_name(LlmTask task, int n);

 protected:
  Completion complete(LlmTask task, const std::string& prompt) override;

 private:
  std::optional<std::filesystem::path> dir_;
  std::map<LlmTask, std::deque<std::string>> queued_;
  std::map<LlmTask, int> served_;
  std::vector<Call> calls_;
};

struct HttpLlmConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key_env = "HAVEN_API_KEY";
  int timeout_seconds = 120;
  double temperature = 0.0;
};

// Chat-completions wire format over HTTP(S).
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpLlmConfig config);

  const HttpLlmConfig& config() const { return config_; }

 protected:
  Completion complete(LlmTask task, const std::string& prompt) override;

 private:
  HttpLlmConfig config_;
};

}  // namespace tbsynth
