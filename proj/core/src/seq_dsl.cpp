#include "tbsynth/seq_dsl.hpp"

#include <algorithm>

#include "bus_view.hpp"
#include "dsl_keys.hpp"
#include "tbsynth/strategy.hpp"
#include "tbsynth/templates.hpp"
#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

namespace {

struct StepName {
  StepType type;
  const char* name;
};

constexpr StepName kStepNames[] = {
    {StepType::kRegisterWrite, "register_write"}, {StepType::kRegisterRead, "register_read"},
    {StepType::kPoll, "poll"},                    {StepType::kRandomizeSend, "randomize_send"},
    {StepType::kDelay, "delay"},                  {StepType::kMemoryWrite, "memory_write"},
    {StepType::kBfmAction, "bfm_action"},         {StepType::kConfigSweep, "config_sweep"},
    {StepType::kValueSweep, "value_sweep"},       {StepType::kTogglePattern, "toggle_pattern"},
};

constexpr std::uint64_t kMaxRepeat = 65536;
constexpr std::uint64_t kMaxDelay = 1000000;
constexpr std::uint64_t kMaxSweep = 65536;

}  // namespace

std::string_view to_string(StepType t) {
  for (const auto& s : kStepNames) {
    if (s.type == t) return s.name;
  }
  return "?";
}

std::optional<StepType> step_type_from_string(std::string_view s) {
  for (const auto& n : kStepNames) {
    if (s == n.name) return n.type;
  }
  return std::nullopt;
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kEq: return "eq";
    case Relation::kInSet: return "in_set";
    case Relation::kInRange: return "in_range";
  }
  return "?";
}

std::string_view to_string(TogglePattern p) {
  switch (p) {
    case TogglePattern::kWalkingOne: return "walking_one";
    case TogglePattern::kWalkingZero: return "walking_zero";
    case TogglePattern::kAlternating: return "alternating";
  }
  return "?";
}

std::string_view to_string(DslErrorKind k) {
  switch (k) {
    case DslErrorKind::kJsonSyntax: return "JsonSyntax";
    case DslErrorKind::kSchemaViolation: return "SchemaViolation";
    case DslErrorKind::kUnknownStepType: return "UnknownStepType";
    case DslErrorKind::kExpressivenessExceeded: return "ExpressivenessExceeded";
    case DslErrorKind::kUnknownField: return "UnknownField";
    case DslErrorKind::kUnknownRegister: return "UnknownRegister";
    case DslErrorKind::kRegisterAccess: return "RegisterAccess";
    case DslErrorKind::kUnknownBfm: return "UnknownBfm";
    case DslErrorKind::kUnknownBfmAction: return "UnknownBfmAction";
    case DslErrorKind::kValueOverflow: return "ValueOverflow";
    case DslErrorKind::kUnboundedPoll: return "UnboundedPoll";
    case DslErrorKind::kHdlPayloadRejected: return "HdlPayloadRejected";
    case DslErrorKind::kDuplicateSequenceName: return "DuplicateSequenceName";
  }
  return "?";
}

std::string DslError::to_string() const {
  std::string out(tbsynth::to_string(kind));
  if (sequence >= 0) {
    out += " sequences[" + std::to_string(sequence) + "]";
    if (step >= 0) out += ".steps[" + std::to_string(step) + "]";
  }
  return out + ": " + message;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const DslStep& s) {
  json j;
  j["type"] = std::string(to_string(s.type));
  switch (s.type) {
    case StepType::kRegisterWrite:
      j["addr"] = s.addr;
      j["value"] = s.value;
      break;
    case StepType::kRegisterRead:
      j["addr"] = s.addr;
      if (!s.store_as.empty()) j["store_as"] = s.store_as;
      break;
    case StepType::kPoll:
      j["addr"] = s.addr;
      j["mask"] = s.mask;
      j["expected"] = s.expected;
      j["max_iters"] = s.max_iters;
      j["interval_cycles"] = s.interval_cycles;
      break;
    case StepType::kRandomizeSend: {
      json cs = json::array();
      for (const auto& c : s.constraints) {
        json jc = {{"field", c.field}, {"relation", std::string(to_string(c.relation))}};
        if (c.relation == Relation::kEq) {
          jc["operand"] = c.operand.empty() ? 0 : c.operand.front();
        } else {
          jc["operand"] = c.operand;
        }
        cs.push_back(jc);
      }
      j["constraints"] = cs;
      j["repeat"] = s.repeat;
      break;
    }
    case StepType::kDelay: j["cycles"] = s.cycles; break;
    case StepType::kMemoryWrite:
      j["bfm"] = s.bfm;
      j["base_addr"] = s.base_addr;
      j["data"] = s.data;
      break;
    case StepType::kBfmAction:
      j["bfm"] = s.bfm;
      j["action"] = s.action;
      j["params"] = json::object();
      for (const auto& [k, v] : s.params) j["params"][k] = v;
      break;
    case StepType::kConfigSweep: {
      json fs = json::array();
      for (const auto& f : s.sweep) fs.push_back({{"field", f.field}, {"values", f.values}});
      j["fields"] = fs;
      break;
    }
    case StepType::kValueSweep:
      j["field"] = s.field;
      j["values"] = s.values;
      break;
    case StepType::kTogglePattern:
      j["field"] = s.field;
      j["pattern"] = std::string(to_string(s.pattern));
      break;
  }
  return j;
}

json to_json(const DslSequence& s) {
  json steps = json::array();
  for (const auto& st : s.steps) steps.push_back(to_json(st));
  return {{"name", s.name}, {"description", s.description}, {"steps", steps}};
}

json to_json(const DslDocument& d) {
  json seqs = json::array();
  for (const auto& s : d.sequences) seqs.push_back(to_json(s));
  return {{"schema_version", d.schema_version}, {"sequences", seqs}};
}

std::string serialize_dsl(const DslDocument& d) { return to_json(d).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Structural decoding

namespace {

class StepDecoder {
 public:
  StepDecoder(const json& j, int seq, int step, std::vector<DslError>& errors)
      : j_(j), seq_(seq), step_(step), errors_(errors) {}

  void fail(DslErrorKind k, std::string msg) {
    errors_.push_back({k, seq_, step_, std::move(msg)});
    ok_ = false;
  }
  bool ok() const { return ok_; }

  std::optional<std::uint64_t> uint(const json& v, const std::string& what) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      const auto i = v.get<std::int64_t>();
      if (i >= 0) return static_cast<std::uint64_t>(i);
    }
    fail(DslErrorKind::kSchemaViolation, what + " must be a non-negative integer, found " + v.dump());
    return std::nullopt;
  }

  std::uint64_t req_uint(const char* key) {
    if (!j_.contains(key)) {
      fail(DslErrorKind::kSchemaViolation, std::string("missing '") + key + "'");
      return 0;
    }
    return uint(j_.at(key), key).value_or(0);
  }

  std::vector<std::uint64_t> uint_list(const json& v, const std::string& what) {
    std::vector<std::uint64_t> out;
    if (!v.is_array()) {
      fail(DslErrorKind::kSchemaViolation, what + " must be a list of integers");
      return out;
    }
    for (const auto& e : v) out.push_back(uint(e, what).value_or(0));
    return out;
  }

  std::string req_string(const char* key) {
    if (!j_.contains(key) || !j_.at(key).is_string()) {
      fail(DslErrorKind::kSchemaViolation, std::string("'") + key + "' must be a string");
      return "";
    }
    return j_.at(key).get<std::string>();
  }

  std::optional<DslStep> decode() {
    if (!j_.is_object()) {
      fail(DslErrorKind::kSchemaViolation, "step must be an object");
      return std::nullopt;
    }
    if (!j_.contains("type") || !j_.at("type").is_string()) {
      fail(DslErrorKind::kSchemaViolation, "step needs a string 'type'");
      return std::nullopt;
    }
    const std::string type_name = j_.at("type").get<std::string>();
    if (dsl::is_control_flow_word(type_name)) {
      fail(DslErrorKind::kExpressivenessExceeded,
           "control flow '" + type_name + "' is outside the DSL; express it with sweeps or repeat");
      return std::nullopt;
    }
    const auto type = step_type_from_string(type_name);
    if (!type) {
      fail(DslErrorKind::kUnknownStepType, "unknown step type '" + type_name + "'");
      return std::nullopt;
    }
    for (const auto& [key, _] : j_.items()) {
      if (key == "type") continue;
      if (dsl::is_hdl_payload_key(key)) {
        fail(DslErrorKind::kHdlPayloadRejected, "raw HDL payload key '" + key + "' is not accepted");
      } else if (dsl::is_control_flow_word(key)) {
        fail(DslErrorKind::kExpressivenessExceeded, "control flow key '" + key + "' is outside the DSL");
      } else if (!dsl::is_known_key(*type, key)) {
        fail(DslErrorKind::kSchemaViolation, "unknown key '" + key + "' for " + type_name);
      }
    }
    if (!ok_) return std::nullopt;

    DslStep s;
    s.type = *type;
    switch (*type) {
      case StepType::kRegisterWrite:
        s.addr = req_uint("addr");
        s.value = req_uint("value");
        break;
      case StepType::kRegisterRead:
        s.addr = req_uint("addr");
        if (j_.contains("store_as")) s.store_as = req_string("store_as");
        break;
      case StepType::kPoll:
        s.addr = req_uint("addr");
        s.mask = req_uint("mask");
        s.expected = req_uint("expected");
        if (!j_.contains("max_iters")) {
          fail(DslErrorKind::kUnboundedPoll, "poll needs max_iters");
        } else {
          s.max_iters = uint(j_.at("max_iters"), "max_iters").value_or(0);
        }
        if (j_.contains("interval_cycles")) {
          s.interval_cycles = uint(j_.at("interval_cycles"), "interval_cycles").value_or(1);
        }
        break;
      case StepType::kRandomizeSend:
        if (j_.contains("repeat")) s.repeat = uint(j_.at("repeat"), "repeat").value_or(1);
        if (j_.contains("constraints")) {
          const json& cs = j_.at("constraints");
          if (!cs.is_array()) {
            fail(DslErrorKind::kSchemaViolation, "constraints must be a list");
            break;
          }
          for (const auto& c : cs) decode_constraint(c, s);
        }
        break;
      case StepType::kDelay: s.cycles = req_uint("cycles"); break;
      case StepType::kMemoryWrite:
        s.bfm = req_string("bfm");
        s.base_addr = req_uint("base_addr");
        if (!j_.contains("data")) {
          fail(DslErrorKind::kSchemaViolation, "missing 'data'");
        } else {
          s.data = uint_list(j_.at("data"), "data");
        }
        break;
      case StepType::kBfmAction:
        s.bfm = req_string("bfm");
        s.action = req_string("action");
        if (j_.contains("params")) {
          const json& p = j_.at("params");
          if (!p.is_object()) {
            fail(DslErrorKind::kSchemaViolation, "params must be an object");
          } else {
            for (const auto& [k, v] : p.items()) s.params[k] = uint(v, "params." + k).value_or(0);
          }
        }
        break;
      case StepType::kConfigSweep: {
        if (!j_.contains("fields") || !j_.at("fields").is_array()) {
          fail(DslErrorKind::kSchemaViolation, "config_sweep needs a 'fields' list");
          break;
        }
        for (const auto& f : j_.at("fields")) {
          if (!f.is_object() || !f.contains("field") || !f.at("field").is_string() || !f.contains("values")) {
            fail(DslErrorKind::kSchemaViolation, "config_sweep field entries need 'field' and 'values'");
            continue;
          }
          for (const auto& [k, _] : f.items()) {
            if (k != "field" && k != "values") fail(DslErrorKind::kSchemaViolation, "unknown key '" + k + "'");
          }
          s.sweep.push_back({f.at("field").get<std::string>(), uint_list(f.at("values"), "values")});
        }
        break;
      }
      case StepType::kValueSweep:
        s.field = req_string("field");
        if (!j_.contains("values")) {
          fail(DslErrorKind::kSchemaViolation, "missing 'values'");
        } else {
          s.values = uint_list(j_.at("values"), "values");
        }
        break;
      case StepType::kTogglePattern: {
        s.field = req_string("field");
        const std::string p = req_string("pattern");
        if (p == "walking_one") s.pattern = TogglePattern::kWalkingOne;
        else if (p == "walking_zero") s.pattern = TogglePattern::kWalkingZero;
        else if (p == "alternating") s.pattern = TogglePattern::kAlternating;
        else if (ok_) fail(DslErrorKind::kSchemaViolation, "unknown toggle pattern '" + p + "'");
        break;
      }
    }
    if (!ok_) return std::nullopt;
    return s;
  }

 private:
  void decode_constraint(const json& c, DslStep& s) {
    if (!c.is_object() || !c.contains("field") || !c.at("field").is_string() || !c.contains("relation") ||
        !c.at("relation").is_string() || !c.contains("operand")) {
      fail(DslErrorKind::kSchemaViolation, "constraint needs 'field', 'relation' and 'operand'");
      return;
    }
    for (const auto& [k, _] : c.items()) {
      if (k != "field" && k != "relation" && k != "operand") {
        fail(DslErrorKind::kSchemaViolation, "unknown constraint key '" + k + "'");
      }
    }
    Constraint out;
    out.field = c.at("field").get<std::string>();
    const std::string rel = c.at("relation").get<std::string>();
    const json& op = c.at("operand");
    if (rel == "eq") {
      out.relation = Relation::kEq;
      if (auto v = uint(op, "operand")) out.operand = {*v};
    } else if (rel == "in_set") {
      out.relation = Relation::kInSet;
      out.operand = uint_list(op, "operand");
      if (out.operand.empty()) fail(DslErrorKind::kSchemaViolation, "in_set needs at least one value");
    } else if (rel == "in_range") {
      out.relation = Relation::kInRange;
      out.operand = uint_list(op, "operand");
      if (out.operand.size() != 2 || out.operand[0] > out.operand[1]) {
        fail(DslErrorKind::kSchemaViolation, "in_range needs [lo, hi] with lo <= hi");
      }
    } else {
      fail(DslErrorKind::kSchemaViolation, "unknown relation '" + rel + "'");
    }
    s.constraints.push_back(std::move(out));
  }

  const json& j_;
  int seq_;
  int step_;
  std::vector<DslError>& errors_;
  bool ok_ = true;
};

std::optional<DslSequence> decode_sequence(const json& j, int idx, std::vector<DslError>& errors) {
  auto fail = [&](DslErrorKind k, std::string msg) { errors.push_back({k, idx, -1, std::move(msg)}); };
  if (!j.is_object()) {
    fail(DslErrorKind::kSchemaViolation, "sequence must be an object");
    return std::nullopt;
  }
  bool ok = true;
  for (const auto& [k, _] : j.items()) {
    if (k == "name" || k == "description" || k == "steps") continue;
    if (dsl::is_hdl_payload_key(k)) {
      fail(DslErrorKind::kHdlPayloadRejected, "raw HDL payload key '" + k + "' is not accepted");
    } else {
      fail(DslErrorKind::kSchemaViolation, "unknown sequence key '" + k + "'");
    }
    ok = false;
  }
  DslSequence s;
  if (!j.contains("name") || !j.at("name").is_string() || !text::is_identifier(j.at("name").get<std::string>())) {
    fail(DslErrorKind::kSchemaViolation, "sequence needs an identifier 'name'");
    ok = false;
  } else {
    s.name = j.at("name").get<std::string>();
  }
  if (j.contains("description")) {
    if (!j.at("description").is_string()) {
      fail(DslErrorKind::kSchemaViolation, "description must be a string");
      ok = false;
    } else {
      s.description = j.at("description").get<std::string>();
    }
  }
  if (!j.contains("steps") || !j.at("steps").is_array() || j.at("steps").empty()) {
    fail(DslErrorKind::kSchemaViolation, "sequence needs a nonempty 'steps' list");
    return std::nullopt;
  }
  int step_idx = 0;
  for (const auto& st : j.at("steps")) {
    StepDecoder d(st, idx, step_idx++, errors);
    auto step = d.decode();
    if (!step) {
      ok = false;
      continue;
    }
    s.steps.push_back(std::move(*step));
  }
  if (!ok) return std::nullopt;
  return s;
}

}  // namespace

DecodedDocument decode_document(const json& doc) {
  DecodedDocument out;
  if (!doc.is_object()) {
    out.errors.push_back({DslErrorKind::kSchemaViolation, -1, -1, "document must be an object"});
    return out;
  }
  for (const auto& [k, _] : doc.items()) {
    if (k != "schema_version" && k != "sequences") {
      out.errors.push_back({DslErrorKind::kSchemaViolation, -1, -1, "unknown top-level key '" + k + "'"});
    }
  }
  if (doc.contains("schema_version") && doc.at("schema_version") != kDslSchemaVersion) {
    out.errors.push_back({DslErrorKind::kSchemaViolation, -1, -1,
                          std::string("schema_version must be \"") + kDslSchemaVersion + "\""});
  }
  if (!doc.contains("sequences") || !doc.at("sequences").is_array()) {
    out.errors.push_back({DslErrorKind::kSchemaViolation, -1, -1, "document needs a 'sequences' list"});
    return out;
  }
  int idx = 0;
  for (const auto& s : doc.at("sequences")) {
    if (auto seq = decode_sequence(s, idx, out.errors)) {
      out.sequences.push_back(std::move(*seq));
      out.source_index.push_back(idx);
    }
    ++idx;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Semantic checks

namespace {

struct Checker {
  const Blueprint& bp;
  detail::BusView bus;
  std::vector<DslError> errors;

  void fail(DslErrorKind k, std::string msg) { errors.push_back({k, -1, -1, std::move(msg)}); }

  void fits(std::uint64_t v, int width, const std::string& what) {
    if (!text::fits_in_width(v, width)) {
      fail(DslErrorKind::kValueOverflow,
           what + " value " + text::hex(v) + " does not fit in " + std::to_string(width) + " bits");
    }
  }

  const RegisterDecl* reg_at(std::uint64_t addr) {
    const RegisterDecl* r = bp.find_register_at(addr);
    if (!r) fail(DslErrorKind::kUnknownRegister, "no register at address " + text::hex(addr));
    return r;
  }

  std::string unknown_field_message(const std::string& name) {
    if (const PortDecl* p = bp.find_port(name); p && p->port_class != PortClass::kStimulus) {
      return "'" + name + "' is a " + std::string(to_string(p->port_class)) + " port and cannot be stimulated";
    }
    return "'" + name + "' is not a seq_item field, register or register field";
  }

  // Sweep and toggle targets: drivable seq_item fields or writable registers.
  std::optional<detail::FieldTarget> stimulus_target(const std::string& name) {
    const detail::FieldTarget t = detail::resolve_field(bp, bus, name);
    switch (t.kind) {
      case detail::FieldTarget::kNone: fail(DslErrorKind::kUnknownField, unknown_field_message(name)); return {};
      case detail::FieldTarget::kOp:
      case detail::FieldTarget::kBusMember:
        fail(DslErrorKind::kUnknownField, "'" + name + "' is a bus signal; use register steps");
        return {};
      case detail::FieldTarget::kPort: {
        const SeqItemField* f = bp.find_field(name);
        if (f && f->direction == FieldDirection::kFromDut) {
          fail(DslErrorKind::kUnknownField, "'" + name + "' is a DUT output and cannot be driven");
          return {};
        }
        return t;
      }
      case detail::FieldTarget::kRegister:
      case detail::FieldTarget::kRegisterField:
        if (!t.reg->writable()) {
          fail(DslErrorKind::kRegisterAccess, "register " + t.reg->name + " is read-only");
          return {};
        }
        return t;
    }
    return {};
  }

  void constraint(const Constraint& c) {
    const detail::FieldTarget t = detail::resolve_field(bp, bus, c.field);
    const bool member = t.kind == detail::FieldTarget::kOp || t.kind == detail::FieldTarget::kBusMember ||
                        bp.find_field(c.field) != nullptr;
    if (!member) {
      fail(DslErrorKind::kUnknownField, unknown_field_message(c.field));
      return;
    }
    for (auto v : c.operand) {
      if (t.kind == detail::FieldTarget::kOp && v > 2) {
        fail(DslErrorKind::kValueOverflow, "op must be 0 (idle), 1 (write) or 2 (read)");
      } else {
        fits(v, t.width, "constraint on " + c.field);
      }
    }
  }

  void step(const DslStep& s) {
    switch (s.type) {
      case StepType::kRegisterWrite:
        if (const RegisterDecl* r = reg_at(s.addr)) {
          if (!r->writable()) fail(DslErrorKind::kRegisterAccess, "register " + r->name + " is read-only");
          fits(s.value, r->width, "register " + r->name);
        }
        break;
      case StepType::kRegisterRead:
        if (const RegisterDecl* r = reg_at(s.addr)) {
          if (!r->readable()) fail(DslErrorKind::kRegisterAccess, "register " + r->name + " is write-only");
        }
        if (!s.store_as.empty() && !text::is_identifier(s.store_as)) {
          fail(DslErrorKind::kSchemaViolation, "store_as must be an identifier");
        }
        break;
      case StepType::kPoll:
        if (const RegisterDecl* r = reg_at(s.addr)) {
          if (!r->readable()) fail(DslErrorKind::kRegisterAccess, "register " + r->name + " is write-only");
          fits(s.mask, r->width, "poll mask");
          fits(s.expected, r->width, "poll expected");
        }
        if (s.max_iters == 0 || s.max_iters > kPollMaxItersCap) {
          fail(DslErrorKind::kUnboundedPoll,
               "max_iters must be in 1.." + std::to_string(kPollMaxItersCap));
        }
        if (s.interval_cycles == 0 || s.interval_cycles > kMaxDelay) {
          fail(DslErrorKind::kSchemaViolation, "interval_cycles must be in 1.." + std::to_string(kMaxDelay));
        }
        break;
      case StepType::kRandomizeSend:
        if (s.repeat == 0 || s.repeat > kMaxRepeat) {
          fail(DslErrorKind::kValueOverflow, "repeat must be in 1.." + std::to_string(kMaxRepeat));
        }
        for (const auto& c : s.constraints) constraint(c);
        break;
      case StepType::kDelay:
        if (s.cycles == 0 || s.cycles > kMaxDelay) {
          fail(DslErrorKind::kValueOverflow, "delay cycles must be in 1.." + std::to_string(kMaxDelay));
        }
        break;
      case StepType::kMemoryWrite:
      case StepType::kBfmAction: {
        const BfmDecl* b = bp.find_bfm(s.bfm);
        if (!b) {
          fail(DslErrorKind::kUnknownBfm, "no BFM instance '" + s.bfm + "'");
          break;
        }
        const BfmTemplateInfo* info = TemplateLibrary::builtin().bfm_info(b->kind);
        if (s.type == StepType::kMemoryWrite) {
          if (!info || !info->has_memory) {
            fail(DslErrorKind::kUnknownBfmAction,
                 "BFM '" + s.bfm + "' (" + std::string(to_string(b->kind)) + ") has no memory");
          }
          if (s.data.empty()) fail(DslErrorKind::kSchemaViolation, "memory_write needs data");
          break;
        }
        const BfmActionSpec* a = info ? info->find_action(s.action) : nullptr;
        if (!a) {
          fail(DslErrorKind::kUnknownBfmAction,
               "BFM '" + s.bfm + "' (" + std::string(to_string(b->kind)) + ") has no action '" + s.action + "'");
          break;
        }
        for (const auto& [k, v] : s.params) {
          if (std::find(a->params.begin(), a->params.end(), k) == a->params.end()) {
            fail(DslErrorKind::kUnknownBfmAction, "action " + s.action + " has no parameter '" + k + "'");
          }
          fits(v, 32, "parameter " + k);
        }
        break;
      }
      case StepType::kValueSweep:
        if (s.values.empty() || s.values.size() > kMaxSweep) {
          fail(DslErrorKind::kValueOverflow, "value_sweep needs 1.." + std::to_string(kMaxSweep) + " values");
        }
        if (auto t = stimulus_target(s.field)) {
          for (auto v : s.values) fits(v, t->width, s.field);
        }
        break;
      case StepType::kConfigSweep: {
        if (s.sweep.empty()) fail(DslErrorKind::kSchemaViolation, "config_sweep needs fields");
        std::uint64_t product = 1;
        const RegisterDecl* shared = nullptr;
        std::set<std::string> names;
        for (const auto& f : s.sweep) {
          if (!names.insert(f.field).second) {
            fail(DslErrorKind::kSchemaViolation, "config_sweep lists " + f.field + " twice");
          }
          if (f.values.empty()) fail(DslErrorKind::kSchemaViolation, "config_sweep field " + f.field + " has no values");
          product = std::min<std::uint64_t>(product * std::max<std::size_t>(f.values.size(), 1), kMaxSweep + 1);
          auto t = stimulus_target(f.field);
          if (!t) continue;
          for (auto v : f.values) fits(v, t->width, f.field);
          if (t->reg) {
            if (shared && shared != t->reg) {
              fail(DslErrorKind::kSchemaViolation,
                   "config_sweep register fields must share one register (" + shared->name + ", " +
                       t->reg->name + ")");
            }
            if (t->kind == detail::FieldTarget::kRegister && names.size() > 1 && shared == t->reg) {
              fail(DslErrorKind::kSchemaViolation, "config_sweep mixes register " + t->reg->name + " with its fields");
            }
            shared = t->reg;
          }
        }
        if (product > kMaxSweep) {
          fail(DslErrorKind::kValueOverflow, "config_sweep exceeds " + std::to_string(kMaxSweep) + " tuples");
        }
        break;
      }
      case StepType::kTogglePattern:
        stimulus_target(s.field);
        break;
    }
  }
};

}  // namespace

std::vector<DslError> check_step(const DslStep& step, const Blueprint& bp) {
  Checker c{bp, detail::make_bus_view(bp), {}};
  c.step(step);
  return c.errors;
}

ValidationResult validate(const json& doc, const Blueprint& bp, const std::set<std::string>& existing_names) {
  ValidationResult r;
  DecodedDocument d = decode_document(doc);
  r.errors = d.errors;
  std::set<std::string> seen = existing_names;
  for (std::size_t i = 0; i < d.sequences.size(); ++i) {
    const DslSequence& s = d.sequences[i];
    const int seq_idx = d.source_index[i];
    for (std::size_t k = 0; k < s.steps.size(); ++k) {
      for (auto e : check_step(s.steps[k], bp)) {
        e.sequence = seq_idx;
        e.step = static_cast<int>(k);
        r.errors.push_back(std::move(e));
      }
    }
    if (!seen.insert(s.name).second) {
      r.errors.push_back({DslErrorKind::kDuplicateSequenceName, seq_idx, -1,
                          "sequence name '" + s.name + "' is already in use"});
    }
  }
  if (r.errors.empty()) {
    r.document = DslDocument{kDslSchemaVersion, std::move(d.sequences)};
  }
  return r;
}

ValidationResult validate(std::string_view json_text, const Blueprint& bp,
                          const std::set<std::string>& existing_names) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    ValidationResult r;
    r.errors.push_back({DslErrorKind::kJsonSyntax, -1, -1, "byte " + std::to_string(e.byte) + ": " + e.what()});
    return r;
  }
  return validate(doc, bp, existing_names);
}

// ---------------------------------------------------------------------------
// Safety filters

FilterResult apply_safety_filters(const DslSequence& seq, const Blueprint& bp) {
  FilterResult out;
  const detail::BusView bus = detail::make_bus_view(bp);
  DslSequence kept = seq;
  kept.steps.clear();
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    DslStep step = seq.steps[i];
    const int idx = static_cast<int>(i);
    if (step.type == StepType::kRandomizeSend) {
      std::vector<Constraint> cs;
      for (const auto& c : step.constraints) {
        std::string reason;
        if (const SeqItemField* f = bp.find_field(c.field)) {
          if (f->direction == FieldDirection::kFromDut) reason = c.field + " is driven by the DUT";
          else if (infer_strategy(*f).kind == StrategyKind::kFixed) reason = c.field + " has a fixed value";
        } else if (const detail::BusMember* m = bus.member(c.field); m && !m->rand) {
          reason = c.field + " is driven by the DUT";
        }
        if (reason.empty()) {
          cs.push_back(c);
        } else {
          out.log.push_back({idx, "dropped_constraint", reason});
        }
      }
      step.constraints = std::move(cs);
    }
    const auto errors = check_step(step, bp);
    if (!errors.empty()) {
      out.log.push_back({idx, "rejected_step", errors.front().to_string()});
      continue;
    }
    kept.steps.push_back(std::move(step));
  }
  if (kept.steps.empty()) {
    out.rejected = true;
  } else {
    out.sequence = std::move(kept);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> toggle_values(TogglePattern p, int width) {
  std::vector<std::uint64_t> out;
  const std::uint64_t mask = text::width_mask(width);
  switch (p) {
    case TogglePattern::kWalkingOne:
      for (int i = 0; i < width; ++i) out.push_back(std::uint64_t{1} << i);
      break;
    case TogglePattern::kWalkingZero:
      for (int i = 0; i < width; ++i) out.push_back(mask ^ (std::uint64_t{1} << i));
      break;
    case TogglePattern::kAlternating:
      out.push_back(0x5555555555555555ULL & mask);
      out.push_back(0xAAAAAAAAAAAAAAAAULL & mask);
      break;
  }
  return out;
}

std::vector<std::vector<std::uint64_t>> expand_config_sweep(const std::vector<SweepField>& fields) {
  std::vector<std::vector<std::uint64_t>> out;
  if (fields.empty()) return out;
  for (const auto& f : fields) {
    if (f.values.empty()) return out;
  }
  std::vector<std::size_t> idx(fields.size(), 0);
  while (true) {
    std::vector<std::uint64_t> tuple;
    for (std::size_t i = 0; i < fields.size(); ++i) tuple.push_back(fields[i].values[idx[i]]);
    out.push_back(std::move(tuple));
    std::size_t k = fields.size();
    while (k > 0) {
      --k;
      if (++idx[k] < fields[k].values.size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
  }
}

std::uint64_t transaction_count(const DslStep& step, const Blueprint& bp) {
  switch (step.type) {
    case StepType::kRegisterWrite:
    case StepType::kRegisterRead:
    case StepType::kPoll:
    case StepType::kRandomizeSend: return 1;
    case StepType::kDelay:
    case StepType::kMemoryWrite:
    case StepType::kBfmAction: return 0;
    case StepType::kValueSweep: return step.values.size();
    case StepType::kConfigSweep: {
      std::uint64_t n = 1;
      for (const auto& f : step.sweep) n *= f.values.size();
      return step.sweep.empty() ? 0 : n;
    }
    case StepType::kTogglePattern: {
      const auto t = detail::resolve_field(bp, detail::make_bus_view(bp), step.field);
      return toggle_values(step.pattern, t.width).size();
    }
  }
  return 0;
}

}  // namespace tbsynth
