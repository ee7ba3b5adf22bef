#include "tbsynth/llm_client.hpp"

#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

std::string_view to_string(LlmTask t) {
  switch (t) {
    case LlmTask::kExtractBlueprint: return "extract_blueprint";
    case LlmTask::kGenerateDsl: return "generate_dsl";
    case LlmTask::kProposeFix: return "propose_fix";
  }
  return "unknown";
}

void TokenLedger::record(LlmTask task, std::uint64_t input_tokens, std::uint64_t output_tokens) {
  auto& u = by_task_[task];
  ++u.calls;
  u.input_tokens += input_tokens;
  u.output_tokens += output_tokens;
}

TokenUsage TokenLedger::total() const {
  TokenUsage t;
  for (const auto& [task, u] : by_task_) {
    t.calls += u.calls;
    t.input_tokens += u.input_tokens;
    t.output_tokens += u.output_tokens;
  }
  return t;
}

TokenUsage TokenLedger::for_task(LlmTask task) const {
  auto it = by_task_.find(task);
  return it == by_task_.end() ? TokenUsage{} : it->second;
}

json TokenLedger::to_json() const {
  auto usage = [](const TokenUsage& u) {
    return json{{"calls", u.calls}, {"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
  };
  json tasks = json::object();
  for (LlmTask t : {LlmTask::kExtractBlueprint, LlmTask::kGenerateDsl, LlmTask::kProposeFix}) {
    tasks[std::string(to_string(t))] = usage(for_task(t));
  }
  return json{{"total", usage(total())}, {"by_task", tasks}};
}

std::uint64_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::string strip_code_fence(std::string_view text) {
  std::string t = text::trim(text);
  if (!text::starts_with(t, "```")) return t;
  auto nl = t.find('\n');
  if (nl == std::string::npos) return t;
  t.erase(0, nl + 1);
  auto end = t.rfind("```");
  if (end != std::string::npos) t.erase(end);
  return text::trim(t);
}

std::vector<FileEdit> parse_fix_response(std::string_view text) {
  json doc;
  try {
    doc = json::parse(strip_code_fence(text));
  } catch (const json::parse_error& e) {
    throw LlmResponseError(std::string("fix response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("edits") || !doc["edits"].is_array()) {
    throw LlmResponseError("fix response must be an object with an \"edits\" list");
  }
  std::vector<FileEdit> out;
  for (const auto& e : doc["edits"]) {
    if (!e.is_object() || !e.contains("file") || !e["file"].is_string()) {
      throw LlmResponseError("every edit needs a \"file\" string");
    }
    FileEdit fe;
    fe.file = e["file"].get<std::string>();
    if (e.contains("content")) {
      if (!e["content"].is_string()) throw LlmResponseError("edit content must be a string");
      fe.content = e["content"].get<std::string>();
    } else if (e.contains("search") && e.contains("replace") && e["search"].is_string() &&
               e["replace"].is_string()) {
      fe.search = e["search"].get<std::string>();
      fe.replace = e["replace"].get<std::string>();
      if (fe.search.empty()) throw LlmResponseError("edit search text is empty");
    } else {
      throw LlmResponseError("edit for " + fe.file + " needs \"content\" or \"search\"/\"replace\"");
    }
    out.push_back(std::move(fe));
  }
  return out;
}

std::string blueprint_prompt(std::string_view spec_text, const std::vector<std::string>& prior_errors) {
  std::ostringstream o;
  o << "Read the hardware design specification below and answer with one UVM Blueprint JSON document "
       "and nothing else.\n\n"
    << "Blueprint keys: schema_version (1), design_name, protocol {type: wishbone|axi4lite|direct, "
       "variant: ready_done|valid_ready|busy|streaming for direct}, clock, reset {name, active: high|low}, "
       "ports [{name, width, dir: input|output|inout}], seq_item_fields [{name, width, direction: "
       "to_dut|from_dut, role: data|config|control|status, default?, cover_bins?}], registers [{name, "
       "addr: \"0x..\", width, access: rw|ro|wo, fields?: [{name, lsb, msb, default?}]}], bfms [{kind, "
       "name, connections}]. No other keys.\n";
  if (!prior_errors.empty()) {
    o << "\nYour previous Blueprint was rejected:\n";
    for (const auto& e : prior_errors) o << "- " << e << "\n";
    o << "Return a corrected Blueprint.\n";
  }
  o << "\nSpecification:\n" << spec_text;
  if (!spec_text.empty() && spec_text.back() != '\n') o << "\n";
  return o.str();
}

std::string fix_prompt(std::string_view error_log, const NamedFiles& files) {
  std::ostringstream o;
  o << "The testbench failed to compile. Fix it by editing only the files listed below.\n"
    << "Answer with JSON {\"edits\": [{\"file\": name, \"search\": text, \"replace\": text}]} or "
       "{\"edits\": [{\"file\": name, \"content\": full_text}]} and nothing else.\n\n"
    << "Compiler log:\n"
    << error_log;
  if (!error_log.empty() && error_log.back() != '\n') o << "\n";
  for (const auto& [name, content] : files) {
    o << "\n=== " << name << " ===\n" << content;
    if (!content.empty() && content.back() != '\n') o << "\n";
  }
  return o.str();
}

std::string LlmClient::call(LlmTask task, const std::string& prompt) {
  Completion c = complete(task, prompt);
  ledger_.record(task, c.input_tokens.value_or(estimate_tokens(prompt)),
                 c.output_tokens.value_or(estimate_tokens(c.text)));
  return std::move(c.text);
}

std::string LlmClient::extract_blueprint(std::string_view spec_text, const std::vector<std::string>& prior_errors) {
  return strip_code_fence(call(LlmTask::kExtractBlueprint, blueprint_prompt(spec_text, prior_errors)));
}

std::string LlmClient::generate_dsl(std::string_view gap_prompt) {
  return strip_code_fence(call(LlmTask::kGenerateDsl, std::string(gap_prompt)));
}

std::vector<FileEdit> LlmClient::propose_fix(std::string_view error_log,
                                             const NamedFiles& files) {
  return parse_fix_response(call(LlmTask::kProposeFix, fix_prompt(error_log, files)));
}

ScriptedLlmClient::ScriptedLlmClient(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(*dir_)) {
    throw BackendUnavailable("scripted LLM directory not found: " + dir_->string());
  }
}

void ScriptedLlmClient::push(LlmTask task, std::string response) { queued_[task].push_back(std::move(response)); }

std::string ScriptedLlmClient::file_name(LlmTask task, int n) {
  switch (task) {
    case LlmTask::kExtractBlueprint: return "blueprint_" + std::to_string(n) + ".json";
    case LlmTask::kGenerateDsl: return "dsl_" + std::to_string(n) + ".json";
    case LlmTask::kProposeFix: return "fix_" + std::to_string(n) + ".json";
  }
  return {};
}

ScriptedLlmClient::Completion ScriptedLlmClient::complete(LlmTask task, const std::string& prompt) {
  calls_.push_back({task, prompt});
  const int n = ++served_[task];
  Completion c;
  auto& q = queued_[task];
  if (!q.empty()) {
    c.text = std::move(q.front());
    q.pop_front();
    return c;
  }
  if (!dir_) {
    throw BackendUnavailable("no scripted response left for " + std::string(to_string(task)));
  }
  const auto path = *dir_ / file_name(task, n);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendUnavailable("scripted response file missing: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  c.text = ss.str();
  return c;
}

}  // namespace tbsynth
