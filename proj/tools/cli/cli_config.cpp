#include "cli_config.hpp"

#include <cerrno>
#include <cstdlib>
#include <sstream>

namespace tbsynth::cli {

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = {
      {"run.k", "HAVEN_K", "--k"},
      {"run.max_fix", "HAVEN_MAX_FIX", "--max-fix"},
      {"run.threshold", "HAVEN_THRESHOLD", "--threshold"},
      {"run.out", "HAVEN_OUT", "--out"},
      {"llm.backend", "HAVEN_LLM", "--llm"},
      {"llm.endpoint", "HAVEN_LLM_ENDPOINT", "--llm-endpoint"},
      {"llm.model", "HAVEN_LLM_MODEL", "--llm-model"},
      {"llm.api_key_env", "HAVEN_LLM_API_KEY_ENV", ""},
      {"llm.timeout", "HAVEN_LLM_TIMEOUT", ""},
      {"sim.backend", "HAVEN_SIM", "--sim"},
      {"predefined.fifo_depth", "HAVEN_FIFO_DEPTH", ""},
      {"predefined.crv_repeat", "HAVEN_CRV_REPEAT", ""},
      {"predefined.fifo_tokens", "HAVEN_FIFO_TOKENS", ""},
      {"prompt.protocol_notes", "HAVEN_PROTOCOL_NOTES", ""},
  };
  return keys;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v, int lineno) {
  if (v.empty() || v.front() != '"') {
    // Bare value: strip a trailing comment.
    const auto hash = v.find(" #");
    return trim(hash == std::string::npos ? v : v.substr(0, hash));
  }
  std::string out;
  std::size_t i = 1;
  for (; i < v.size() && v[i] != '"'; ++i) {
    if (v[i] == '\\' && i + 1 < v.size()) {
      const char c = v[++i];
      out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
    } else {
      out += v[i];
    }
  }
  if (i >= v.size()) throw ConfigError("config line " + std::to_string(lineno) + ": unterminated string");
  const std::string rest = trim(v.substr(i + 1));
  if (!rest.empty() && rest.front() != '#') {
    throw ConfigError("config line " + std::to_string(lineno) + ": unexpected text after string");
  }
  return out;
}

bool known_key(const std::string& key) {
  for (const auto& k : config_keys()) {
    if (k.key == key) return true;
  }
  return false;
}

int to_int(const std::string& key, const std::string& v, std::string_view source, int lo, int hi) {
  errno = 0;
  char* end = nullptr;
  const long n = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0 || n < lo || n > hi) {
    throw ConfigError(std::string(source) + ": " + key + " must be an integer in " + std::to_string(lo) + ".." +
                      std::to_string(hi) + ", got \"" + v + "\"");
  }
  return static_cast<int>(n);
}

double to_double(const std::string& key, const std::string& v, std::string_view source) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno != 0 || d < 0.0) {
    throw ConfigError(std::string(source) + ": " + key + " must be a non-negative number, got \"" + v + "\"");
  }
  return d;
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    if (!known_key(key)) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key \"" + key + "\"");
    out[key] = unquote(trim(line.substr(eq + 1)), lineno);
  }
  return out;
}

void apply_setting(Settings& s, const std::string& key, const std::string& value, std::string_view source) {
  if (key == "run.k") s.k = to_int(key, value, source, 0, 100);
  else if (key == "run.max_fix") s.max_fix = to_int(key, value, source, 0, 100);
  else if (key == "run.threshold") s.threshold = to_double(key, value, source);
  else if (key == "run.out") s.out = value;
  else if (key == "llm.backend") s.llm = value;
  else if (key == "llm.endpoint") s.llm_endpoint = value;
  else if (key == "llm.model") s.llm_model = value;
  else if (key == "llm.api_key_env") s.llm_api_key_env = value;
  else if (key == "llm.timeout") s.llm_timeout = to_int(key, value, source, 1, 3600);
  else if (key == "sim.backend") s.sim = value;
  else if (key == "predefined.fifo_depth") s.fifo_depth = to_int(key, value, source, 1, 4096);
  else if (key == "predefined.crv_repeat") s.crv_repeat = to_int(key, value, source, 1, 65536);
  else if (key == "predefined.fifo_tokens") s.fifo_tokens = to_list(value);
  else if (key == "prompt.protocol_notes") s.protocol_notes = value;
  else throw ConfigError(std::string(source) + ": unknown key \"" + key + "\"");
}

Settings resolve_settings(const std::optional<std::string>& config_text, const EnvLookup& env,
                          const std::map<std::string, std::string>& flags) {
  Settings s;
  if (config_text) {
    for (const auto& [k, v] : parse_config_text(*config_text)) apply_setting(s, k, v, "config file");
  }
  for (const auto& k : config_keys()) {
    if (auto v = env(k.env)) apply_setting(s, k.key, *v, k.env);
  }
  for (const auto& [k, v] : flags) apply_setting(s, k, v, "command line");
  return s;
}

RunConfig to_run_config(const Settings& s) {
  RunConfig c;
  c.k = s.k;
  c.max_fix_iterations = s.max_fix;
  c.convergence_threshold = s.threshold;
  c.out_dir = s.out;
  c.predefined.fifo_depth = s.fifo_depth;
  c.predefined.crv_repeat = s.crv_repeat;
  c.predefined.fifo_tokens = s.fifo_tokens;
  c.protocol_notes = s.protocol_notes;
  return c;
}

}  // namespace tbsynth::cli
