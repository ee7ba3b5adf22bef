#include <cctype>
#include <algorithm>
#include <map>

#include "bus_view.hpp"
#include "dsl_keys.hpp"
#include "tbsynth/seq_dsl.hpp"
#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

std::string_view to_string(FixRule r) {
  switch (r) {
    case FixRule::kNumericString: return "numeric_string";
    case FixRule::kRegisterName: return "register_name";
    case FixRule::kStepTypeAlias: return "step_type_alias";
    case FixRule::kPollMaxIters: return "poll_max_iters";
    case FixRule::kPollInterval: return "poll_interval";
    case FixRule::kValueMask: return "value_mask";
    case FixRule::kDropUnknownKey: return "drop_unknown_key";
  }
  return "?";
}

namespace {

const std::map<std::string, std::string>& type_aliases() {
  static const std::map<std::string, std::string> m = {
      {"reg_write", "register_write"},     {"regwrite", "register_write"},
      {"write_reg", "register_write"},     {"write_register", "register_write"},
      {"reg_wr", "register_write"},        {"write", "register_write"},
      {"reg_read", "register_read"},       {"regread", "register_read"},
      {"read_reg", "register_read"},       {"read_register", "register_read"},
      {"reg_rd", "register_read"},         {"read", "register_read"},
      {"poll_register", "poll"},           {"poll_reg", "poll"},
      {"polling", "poll"},                 {"wait_for", "poll"},
      {"random", "randomize_send"},        {"randomize", "randomize_send"},
      {"random_send", "randomize_send"},   {"rand_send", "randomize_send"},
      {"send_random", "randomize_send"},   {"crv", "randomize_send"},
      {"wait", "delay"},                   {"wait_cycles", "delay"},
      {"delay_cycles", "delay"},           {"idle", "delay"},
      {"mem_write", "memory_write"},       {"mem_load", "memory_write"},
      {"memory_load", "memory_write"},     {"backdoor_write", "memory_write"},
      {"bfm_call", "bfm_action"},          {"bfm_task", "bfm_action"},
      {"call_bfm", "bfm_action"},          {"bfm", "bfm_action"},
      {"cfg_sweep", "config_sweep"},       {"sweep_config", "config_sweep"},
      {"sweep", "value_sweep"},            {"sweep_values", "value_sweep"},
      {"values_sweep", "value_sweep"},     {"toggle", "toggle_pattern"},
      {"toggle_bits", "toggle_pattern"},   {"bit_toggle", "toggle_pattern"},
  };
  return m;
}

// "RegWrite", "reg-write", "Reg Write" -> "reg_write"
std::string snake(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '-' || c == ' ' || c == '.') {
      if (!out.empty() && out.back() != '_') out.push_back('_');
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (i > 0 && std::islower(static_cast<unsigned char>(s[i - 1])) && !out.empty() && out.back() != '_') {
        out.push_back('_');
      }
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<std::string> canonical_type(const std::string& raw) {
  if (step_type_from_string(raw)) return raw;
  const std::string s = snake(raw);
  if (dsl::is_control_flow_word(s)) return std::nullopt;
  if (step_type_from_string(s)) return s;
  if (auto it = type_aliases().find(s); it != type_aliases().end()) return it->second;
  // Misspellings: one unique canonical name within two edits.
  std::optional<std::string> best;
  int hits = 0;
  for (int t = 0; t <= static_cast<int>(StepType::kTogglePattern); ++t) {
    const std::string name(to_string(static_cast<StepType>(t)));
    if (edit_distance(s, name) <= 2) {
      best = name;
      ++hits;
    }
  }
  if (hits == 1) return best;
  return std::nullopt;
}

class Fixer {
 public:
  explicit Fixer(const Blueprint& bp) : bp_(bp), bus_(detail::make_bus_view(bp)) {}

  FixLog log;

  void document(json& doc) {
    if (!doc.is_object() || !doc.contains("sequences") || !doc["sequences"].is_array()) return;
    int si = 0;
    for (auto& seq : doc["sequences"]) sequence(seq, si++);
  }

 private:
  void add(int seq, int step, FixRule rule, const json& before, const json& after) {
    log.push_back({seq, step, rule, before.dump(), after.dump()});
  }

  void sequence(json& seq, int si) {
    if (!seq.is_object()) return;
    for (auto it = seq.begin(); it != seq.end();) {
      const std::string k = it.key();
      if (k != "name" && k != "description" && k != "steps" && !dsl::is_hdl_payload_key(k) &&
          !dsl::is_control_flow_word(k)) {
        add(si, -1, FixRule::kDropUnknownKey, json{{k, it.value()}}, nullptr);
        it = seq.erase(it);
      } else {
        ++it;
      }
    }
    if (!seq.contains("steps") || !seq["steps"].is_array()) return;
    int ti = 0;
    for (auto& st : seq["steps"]) step(st, si, ti++);
  }

  std::optional<std::uint64_t> as_uint(const json& v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    return std::nullopt;
  }

  void numeric(json& v, int si, int ti) {
    if (v.is_array()) {
      for (auto& e : v) numeric(e, si, ti);
      return;
    }
    if (!v.is_string()) return;
    if (auto n = text::parse_unsigned(v.get<std::string>())) {
      const json before = v;
      v = *n;
      add(si, ti, FixRule::kNumericString, before, v);
    }
  }

  void register_name(json& v, int si, int ti) {
    if (!v.is_string()) return;
    const std::string name = text::to_lower(v.get<std::string>());
    for (const auto& r : bp_.registers) {
      if (text::to_lower(r.name) == name) {
        const json before = v;
        v = r.address;
        add(si, ti, FixRule::kRegisterName, before, v);
        return;
      }
    }
  }

  void mask_value(json& v, int width, int si, int ti) {
    auto n = as_uint(v);
    if (!n || width <= 0 || text::fits_in_width(*n, width)) return;
    const json before = v;
    v = *n & text::width_mask(width);
    add(si, ti, FixRule::kValueMask, before, v);
  }

  void mask_list(json& v, int width, int si, int ti) {
    if (!v.is_array()) return;
    for (auto& e : v) mask_value(e, width, si, ti);
  }

  int target_width(const json& field) {
    if (!field.is_string()) return 0;
    return detail::resolve_field(bp_, bus_, field.get<std::string>()).width;
  }

  int register_width(const json& addr) {
    auto a = as_uint(addr);
    const RegisterDecl* r = a ? bp_.find_register_at(*a) : nullptr;
    return r ? r->width : 0;
  }

  void step(json& st, int si, int ti) {
    if (!st.is_object()) return;

    // Numeric strings, everywhere a number is expected.
    for (auto it = st.begin(); it != st.end(); ++it) {
      if (dsl::is_numeric_key(it.key()) && it.key() != "addr") numeric(it.value(), si, ti);
    }
    if (st.contains("addr")) numeric(st["addr"], si, ti);
    if (st.contains("params") && st["params"].is_object()) {
      for (auto& v : st["params"]) numeric(v, si, ti);
    }
    if (st.contains("fields") && st["fields"].is_array()) {
      for (auto& f : st["fields"]) {
        if (f.is_object() && f.contains("values")) numeric(f["values"], si, ti);
      }
    }
    if (st.contains("constraints") && st["constraints"].is_array()) {
      for (auto& c : st["constraints"]) {
        if (c.is_object() && c.contains("operand")) numeric(c["operand"], si, ti);
      }
    }

    // Register names in the address slot.
    if (st.contains("addr")) register_name(st["addr"], si, ti);

    // Step type aliases.
    if (!st.contains("type") || !st["type"].is_string()) return;
    const std::string raw = st["type"].get<std::string>();
    if (auto canon = canonical_type(raw); canon && *canon != raw) {
      st["type"] = *canon;
      add(si, ti, FixRule::kStepTypeAlias, raw, *canon);
    }
    const auto type = step_type_from_string(st["type"].get<std::string>());
    if (!type) return;

    if (*type == StepType::kPoll) {
      if (!st.contains("max_iters")) {
        st["max_iters"] = kDefaultPollMaxIters;
        add(si, ti, FixRule::kPollMaxIters, nullptr, st["max_iters"]);
      } else if (auto n = as_uint(st["max_iters"]); n && *n > kPollMaxItersCap) {
        const json before = st["max_iters"];
        st["max_iters"] = kPollMaxItersCap;
        add(si, ti, FixRule::kPollMaxIters, before, st["max_iters"]);
      }
      if (!st.contains("interval_cycles")) {
        st["interval_cycles"] = 1;
        add(si, ti, FixRule::kPollInterval, nullptr, 1);
      }
    }

    // Out-of-width values.
    switch (*type) {
      case StepType::kRegisterWrite:
        if (st.contains("value") && st.contains("addr")) mask_value(st["value"], register_width(st["addr"]), si, ti);
        break;
      case StepType::kPoll:
        if (st.contains("addr")) {
          const int w = register_width(st["addr"]);
          if (st.contains("mask")) mask_value(st["mask"], w, si, ti);
          if (st.contains("expected")) mask_value(st["expected"], w, si, ti);
        }
        break;
      case StepType::kValueSweep:
        if (st.contains("field") && st.contains("values")) mask_list(st["values"], target_width(st["field"]), si, ti);
        break;
      case StepType::kConfigSweep:
        if (st.contains("fields") && st["fields"].is_array()) {
          for (auto& f : st["fields"]) {
            if (f.is_object() && f.contains("field") && f.contains("values")) {
              mask_list(f["values"], target_width(f["field"]), si, ti);
            }
          }
        }
        break;
      case StepType::kRandomizeSend:
        if (st.contains("constraints") && st["constraints"].is_array()) {
          for (auto& c : st["constraints"]) {
            if (!c.is_object() || !c.contains("field") || !c.contains("operand") || !c.contains("relation")) continue;
            const std::string field = c["field"].is_string() ? c["field"].get<std::string>() : "";
            if (field == "op" || c["relation"] == "in_range") continue;
            const int w = target_width(c["field"]);
            if (c["operand"].is_array()) {
              mask_list(c["operand"], w, si, ti);
            } else {
              mask_value(c["operand"], w, si, ti);
            }
          }
        }
        break;
      default: break;
    }

    // Unknown keys that carry no payload.
    for (auto it = st.begin(); it != st.end();) {
      const std::string k = it.key();
      if (!dsl::is_known_key(*type, k) && !dsl::is_hdl_payload_key(k) && !dsl::is_control_flow_word(k)) {
        add(si, ti, FixRule::kDropUnknownKey, json{{k, it.value()}}, nullptr);
        it = st.erase(it);
      } else {
        ++it;
      }
    }
  }

  const Blueprint& bp_;
  detail::BusView bus_;
};

}  // namespace

AutoFixResult auto_fix(const json& doc, const Blueprint& bp) {
  AutoFixResult out;
  out.document = doc;
  Fixer f(bp);
  f.document(out.document);
  out.log = std::move(f.log);
  return out;
}

}  // namespace tbsynth
