#include "dsl_keys.hpp"

#include <set>
#include <string>

namespace tbsynth::dsl {

namespace {

const std::set<std::string, std::less<>>& control_flow_words() {
  static const std::set<std::string, std::less<>> s = {
      "if",     "else",     "elif",     "while",   "loop",     "for",          "foreach", "branch",
      "goto",   "jump",     "call",     "function", "repeat_until", "break", "continue", "condition",
      "switch", "case",     "do_while", "until",   "return",   "subroutine",
  };
  return s;
}

const std::set<std::string, std::less<>>& hdl_keys() {
  static const std::set<std::string, std::less<>> s = {
      "code", "sv",  "systemverilog", "verilog", "hdl",    "raw",
      "raw_sv", "snippet", "inline",  "rtl",     "source", "uvm_code",
  };
  return s;
}

}  // namespace

bool is_control_flow_word(std::string_view key) { return control_flow_words().count(key) > 0; }

bool is_hdl_payload_key(std::string_view key) { return hdl_keys().count(key) > 0; }

bool is_known_key(StepType type, std::string_view key) {
  if (key == "type" || key == "comment" || key == "description") return true;
  switch (type) {
    case StepType::kRegisterWrite: return key == "addr" || key == "value";
    case StepType::kRegisterRead: return key == "addr" || key == "store_as";
    case StepType::kPoll:
      return key == "addr" || key == "mask" || key == "expected" || key == "max_iters" ||
             key == "interval_cycles";
    case StepType::kRandomizeSend: return key == "constraints" || key == "repeat";
    case StepType::kDelay: return key == "cycles";
    case StepType::kMemoryWrite: return key == "bfm" || key == "base_addr" || key == "data";
    case StepType::kBfmAction: return key == "bfm" || key == "action" || key == "params";
    case StepType::kConfigSweep: return key == "fields";
    case StepType::kValueSweep: return key == "field" || key == "values";
    case StepType::kTogglePattern: return key == "field" || key == "pattern";
  }
  return false;
}

bool is_numeric_key(std::string_view key) {
  static const std::set<std::string, std::less<>> s = {
      "addr",   "value",  "mask",      "expected", "max_iters", "interval_cycles",
      "repeat", "cycles", "base_addr", "data",     "values",    "operand",
  };
  return s.count(key) > 0;
}

}  // namespace tbsynth::dsl
