#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbsynth/error.hpp"
#include "tbsynth/orchestrator.hpp"

namespace tbsynth::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Settings {
  int k = 3;
  int max_fix = 5;
  double threshold = kDefaultConvergenceThreshold;
  std::string out = "tbsynth_run";
  std::string llm;  // "scripted:<dir>" or "http"
  std::string llm_endpoint = HttpLlmConfig{}.endpoint;
  std::string llm_model = HttpLlmConfig{}.model;
  std::string llm_api_key_env = HttpLlmConfig{}.api_key_env;
  int llm_timeout = HttpLlmConfig{}.timeout_seconds;
  std::string sim;  // "mock:<profile>" or "external:<command>"
  int fifo_depth = PredefinedOptions{}.fifo_depth;
  int crv_repeat = PredefinedOptions{}.crv_repeat;
  std::vector<std::string> fifo_tokens = PredefinedOptions{}.fifo_tokens;
  std::string protocol_notes;
};

struct KeyInfo {
  std::string key;  // "section.name" as written in the config file
  std::string env;  // environment variable
  std::string flag; // command-line flag, empty if none
};

const std::vector<KeyInfo>& config_keys();

// Looks up an environment variable; returns nullopt when unset.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// key = value lines with optional [section] headers and '#' comments.
// Strings may be quoted. Unknown keys are errors.
std::map<std::string, std::string> parse_config_text(std::string_view text);

// Sets one key from its textual value; throws ConfigError.
void apply_setting(Settings& s, const std::string& key, const std::string& value, std::string_view source);

// defaults < file < env < flags. `flags` is keyed like the config file.
Settings resolve_settings(const std::optional<std::string>& config_text, const EnvLookup& env,
                          const std::map<std::string, std::string>& flags);

RunConfig to_run_config(const Settings& s);

}  // namespace tbsynth::cli
