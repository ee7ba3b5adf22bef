#include <set>

#include "tbsynth/blueprint.hpp"
#include "text_util.hpp"

namespace tbsynth {

namespace {

using nlohmann::json;

std::string json_type_name(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number_unsigned() || j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string '" + j.get<std::string>() + "'";
  if (j.is_array()) return "array";
  return "object";
}

// Collects schema errors while decoding; every accessor records the JSON path.
class Decoder {
 public:
  std::vector<BlueprintError> errors;

  void fail(const std::string& path, const std::string& expected, const json& found) {
    errors.push_back({BlueprintErrorKind::kSchemaViolation, path, expected, json_type_name(found), ""});
  }
  void missing(const std::string& path, const std::string& expected) {
    errors.push_back({BlueprintErrorKind::kSchemaViolation, path, expected, "nothing", "required key missing"});
  }

  bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      fail(path, "object", j);
      return false;
    }
    for (const auto& [k, v] : j.items()) {
      if (!allowed.count(k)) {
        errors.push_back({BlueprintErrorKind::kSchemaViolation, path + "." + k, "known key", "'" + k + "'",
                          "unknown key"});
      }
    }
    return true;
  }

  const json* get(const json& obj, const std::string& key, const std::string& path, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) missing(path + "." + key, "key '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::string str(const json& obj, const std::string& key, const std::string& path,
                  bool required = true) {
    const json* v = get(obj, key, path, required);
    if (!v) return {};
    if (!v->is_string()) {
      fail(path + "." + key, "string", *v);
      return {};
    }
    return v->get<std::string>();
  }

  std::optional<std::uint64_t> uint(const json& obj, const std::string& key, const std::string& path,
                                    bool required = true) {
    const json* v = get(obj, key, path, required);
    if (!v) return std::nullopt;
    return uint_value(*v, path + "." + key);
  }

  std::optional<std::uint64_t> uint_value(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_string()) {
      if (auto parsed = text::parse_unsigned(v.get<std::string>())) return parsed;
    }
    fail(path, "unsigned integer or hex string", v);
    return std::nullopt;
  }

  int integer(const json& obj, const std::string& key, const std::string& path, int fallback) {
    const json* v = get(obj, key, path, true);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      fail(path + "." + key, "integer", *v);
      return fallback;
    }
    return v->get<int>();
  }

  template <typename E>
  std::optional<E> enumerated(const json& obj, const std::string& key, const std::string& path,
                              const std::vector<std::pair<std::string_view, E>>& table,
                              bool required = true) {
    const json* v = get(obj, key, path, required);
    if (!v) return std::nullopt;
    std::string expected;
    for (const auto& [name, e] : table) {
      if (v->is_string() && v->get<std::string>() == name) return e;
      expected += (expected.empty() ? "" : "|") + std::string(name);
    }
    fail(path + "." + key, "one of " + expected, *v);
    return std::nullopt;
  }

  const json* array(const json& obj, const std::string& key, const std::string& path, bool required) {
    const json* v = get(obj, key, path, required);
    if (v && !v->is_array()) {
      fail(path + "." + key, "array", *v);
      return nullptr;
    }
    return v;
  }
};

std::vector<CoverBin> decode_bins(Decoder& d, const json& arr, const std::string& path) {
  std::vector<CoverBin> bins;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const json& b = arr[i];
    if (!d.object(b, p, {"name", "kind", "value", "lo", "hi"})) continue;
    CoverBin bin;
    bin.name = d.str(b, "name", p);
    auto kind = d.enumerated<CoverBinKind>(b, "kind", p,
                                           {{"value", CoverBinKind::kValue},
                                            {"range", CoverBinKind::kRange},
                                            {"auto_width", CoverBinKind::kAutoWidth}});
    if (!kind) continue;
    bin.kind = *kind;
    if (bin.kind == CoverBinKind::kValue) {
      auto v = d.uint(b, "value", p);
      bin.lo = bin.hi = v.value_or(0);
    } else if (bin.kind == CoverBinKind::kRange) {
      bin.lo = d.uint(b, "lo", p).value_or(0);
      bin.hi = d.uint(b, "hi", p).value_or(0);
    }
    bins.push_back(bin);
  }
  return bins;
}

json bins_to_json(const std::vector<CoverBin>& bins) {
  json arr = json::array();
  for (const auto& b : bins) {
    json j;
    j["name"] = b.name;
    switch (b.kind) {
      case CoverBinKind::kValue:
        j["kind"] = "value";
        j["value"] = b.lo;
        break;
      case CoverBinKind::kRange:
        j["kind"] = "range";
        j["lo"] = b.lo;
        j["hi"] = b.hi;
        break;
      case CoverBinKind::kAutoWidth:
        j["kind"] = "auto_width";
        break;
    }
    arr.push_back(j);
  }
  return arr;
}

}  // namespace

BlueprintParseResult blueprint_from_json(const json& doc, const ClassifierLexicon& lexicon) {
  Decoder d;
  Blueprint bp;
  BlueprintParseResult result;
  if (!d.object(doc, "$",
                {"schema_version", "design_name", "protocol", "clock", "reset", "agents", "ports",
                 "seq_item_fields", "registers", "bfms", "coverpoints", "ack_timeout"})) {
    result.errors = std::move(d.errors);
    return result;
  }

  if (const json* v = d.get(doc, "schema_version", "$", true)) {
    if (!v->is_number_integer() || v->get<int>() != kBlueprintSchemaVersion) {
      d.fail("$.schema_version", std::to_string(kBlueprintSchemaVersion), *v);
    }
  }
  bp.design_name = d.str(doc, "design_name", "$");
  if (const json* p = d.get(doc, "protocol", "$", true); p && d.object(*p, "$.protocol", {"type", "variant"})) {
    auto type = d.enumerated<Protocol>(*p, "type", "$.protocol",
                                       {{"direct", Protocol::kDirect},
                                        {"wishbone", Protocol::kWishbone},
                                        {"axi4lite", Protocol::kAxi4Lite}});
    if (type) bp.protocol.type = *type;
    const bool direct = type && *type == Protocol::kDirect;
    auto variant = d.enumerated<HandshakeVariant>(*p, "variant", "$.protocol",
                                                  {{"ready_done", HandshakeVariant::kReadyDone},
                                                   {"valid_ready", HandshakeVariant::kValidReady},
                                                   {"busy", HandshakeVariant::kBusy},
                                                   {"streaming", HandshakeVariant::kStreaming}},
                                                  direct);
    if (variant) {
      if (!direct) {
        d.errors.push_back({BlueprintErrorKind::kSchemaViolation, "$.protocol.variant", "absent",
                            "variant", "variant applies to the direct protocol only"});
      }
      bp.protocol.variant = *variant;
    }
  }
  bp.clock = d.str(doc, "clock", "$");
  if (const json* r = d.get(doc, "reset", "$", true); r && d.object(*r, "$.reset", {"name", "active"})) {
    bp.reset.name = d.str(*r, "name", "$.reset");
    auto active = d.enumerated<bool>(*r, "active", "$.reset", {{"high", true}, {"low", false}});
    if (active) bp.reset.active_high = *active;
  }
  if (const json* v = d.get(doc, "ack_timeout", "$", false)) {
    if (v->is_number_integer()) {
      bp.ack_timeout = v->get<int>();
    } else {
      d.fail("$.ack_timeout", "integer", *v);
    }
  }

  std::vector<PortDecl> raw_ports;
  if (const json* arr = d.array(doc, "ports", "$", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto p = "$.ports[" + std::to_string(i) + "]";
      const json& o = (*arr)[i];
      if (!d.object(o, p, {"name", "width", "dir"})) continue;
      PortDecl port;
      port.name = d.str(o, "name", p);
      port.width = d.integer(o, "width", p, 1);
      if (auto dir = d.enumerated<PortDirection>(o, "dir", p,
                                                 {{"input", PortDirection::kInput},
                                                  {"output", PortDirection::kOutput},
                                                  {"inout", PortDirection::kInout}})) {
        port.direction = *dir;
      }
      raw_ports.push_back(port);
    }
  }
  bp.ports = classify_ports(std::move(raw_ports), bp.protocol, lexicon);

  if (const json* arr = d.array(doc, "seq_item_fields", "$", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto p = "$.seq_item_fields[" + std::to_string(i) + "]";
      const json& o = (*arr)[i];
      if (!d.object(o, p, {"name", "width", "direction", "role", "default", "cover_bins"})) continue;
      SeqItemField f;
      f.name = d.str(o, "name", p);
      f.width = d.integer(o, "width", p, 1);
      if (auto dir = d.enumerated<FieldDirection>(o, "direction", p,
                                                  {{"to_dut", FieldDirection::kToDut},
                                                   {"from_dut", FieldDirection::kFromDut}})) {
        f.direction = *dir;
      }
      if (auto role = d.enumerated<FieldRole>(o, "role", p,
                                              {{"data", FieldRole::kData},
                                               {"config", FieldRole::kConfig},
                                               {"control", FieldRole::kControl},
                                               {"status", FieldRole::kStatus}})) {
        f.role = *role;
      }
      f.default_value = d.uint(o, "default", p, false);
      if (const json* bins = d.array(o, "cover_bins", p, false)) {
        f.cover_bins = decode_bins(d, *bins, p + ".cover_bins");
      }
      bp.seq_item_fields.push_back(std::move(f));
    }
  }

  if (const json* arr = d.array(doc, "registers", "$", false)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto p = "$.registers[" + std::to_string(i) + "]";
      const json& o = (*arr)[i];
      if (!d.object(o, p, {"name", "addr", "width", "access", "fields"})) continue;
      RegisterDecl r;
      r.name = d.str(o, "name", p);
      r.address = d.uint(o, "addr", p).value_or(0);
      r.width = d.integer(o, "width", p, 32);
      if (auto acc = d.enumerated<RegisterAccess>(o, "access", p,
                                                  {{"rw", RegisterAccess::kReadWrite},
                                                   {"ro", RegisterAccess::kReadOnly},
                                                   {"wo", RegisterAccess::kWriteOnly}})) {
        r.access = *acc;
      }
      if (const json* fields = d.array(o, "fields", p, false)) {
        for (std::size_t j = 0; j < fields->size(); ++j) {
          const auto fp = p + ".fields[" + std::to_string(j) + "]";
          const json& fo = (*fields)[j];
          if (!d.object(fo, fp, {"name", "lsb", "msb", "default"})) continue;
          RegisterField rf;
          rf.name = d.str(fo, "name", fp);
          rf.lsb = d.integer(fo, "lsb", fp, 0);
          rf.msb = d.integer(fo, "msb", fp, 0);
          rf.default_value = d.uint(fo, "default", fp, false);
          r.fields.push_back(rf);
        }
      }
      bp.registers.push_back(std::move(r));
    }
  }

  if (const json* arr = d.array(doc, "bfms", "$", false)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto p = "$.bfms[" + std::to_string(i) + "]";
      const json& o = (*arr)[i];
      if (!d.object(o, p, {"kind", "name", "connections"})) continue;
      BfmDecl b;
      std::vector<std::pair<std::string_view, BfmKind>> table;
      for (BfmKind k : all_bfm_kinds()) table.emplace_back(to_string(k), k);
      if (auto kind = d.enumerated<BfmKind>(o, "kind", p, table)) b.kind = *kind;
      b.instance_name = d.str(o, "name", p);
      if (const json* conns = d.get(o, "connections", p, true)) {
        if (!conns->is_object()) {
          d.fail(p + ".connections", "object", *conns);
        } else {
          for (const auto& [k, v] : conns->items()) {
            if (!v.is_string()) {
              d.fail(p + ".connections." + k, "string", v);
              continue;
            }
            b.connections[k] = v.get<std::string>();
          }
        }
      }
      bp.bfms.push_back(std::move(b));
    }
  }

  if (const json* arr = d.array(doc, "agents", "$", false)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto p = "$.agents[" + std::to_string(i) + "]";
      const json& o = (*arr)[i];
      if (!d.object(o, p, {"name", "active"})) continue;
      AgentSpec a;
      a.name = d.str(o, "name", p);
      if (const json* act = d.get(o, "active", p, false)) {
        if (act->is_boolean()) {
          a.active = act->get<bool>();
        } else {
          d.fail(p + ".active", "boolean", *act);
        }
      }
      bp.agents.push_back(a);
    }
  }

  if (const json* arr = d.array(doc, "coverpoints", "$", false)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto p = "$.coverpoints[" + std::to_string(i) + "]";
      const json& o = (*arr)[i];
      if (!d.object(o, p, {"field", "bins"})) continue;
      CoverDecl c;
      c.field = d.str(o, "field", p);
      if (const json* bins = d.array(o, "bins", p, true)) c.bins = decode_bins(d, *bins, p + ".bins");
      bp.coverpoints.push_back(std::move(c));
    }
  }

  if (!d.errors.empty()) {
    result.errors = std::move(d.errors);
    return result;
  }
  result.errors = check_invariants(bp);
  if (result.errors.empty()) result.blueprint = std::move(bp);
  return result;
}

BlueprintParseResult parse_blueprint(std::string_view json_text, const ClassifierLexicon& lexicon) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    BlueprintParseResult r;
    r.errors.push_back({BlueprintErrorKind::kJsonSyntax, "byte " + std::to_string(e.byte), "", "", e.what()});
    return r;
  }
  return blueprint_from_json(doc, lexicon);
}

json to_json(const Blueprint& bp) {
  json j;
  j["schema_version"] = bp.schema_version;
  j["design_name"] = bp.design_name;
  j["protocol"]["type"] = std::string(to_string(bp.protocol.type));
  if (bp.protocol.type == Protocol::kDirect) j["protocol"]["variant"] = std::string(to_string(bp.protocol.variant));
  j["clock"] = bp.clock;
  j["reset"] = {{"name", bp.reset.name}, {"active", bp.reset.active_high ? "high" : "low"}};
  if (bp.ack_timeout) j["ack_timeout"] = *bp.ack_timeout;
  if (!bp.agents.empty()) {
    j["agents"] = json::array();
    for (const auto& a : bp.agents) j["agents"].push_back({{"name", a.name}, {"active", a.active}});
  }
  j["ports"] = json::array();
  for (const auto& p : bp.ports) {
    j["ports"].push_back({{"name", p.name}, {"width", p.width}, {"dir", std::string(to_string(p.direction))}});
  }
  j["seq_item_fields"] = json::array();
  for (const auto& f : bp.seq_item_fields) {
    json o = {{"name", f.name},
              {"width", f.width},
              {"direction", std::string(to_string(f.direction))},
              {"role", std::string(to_string(f.role))}};
    if (f.default_value) o["default"] = *f.default_value;
    if (f.cover_bins) o["cover_bins"] = bins_to_json(*f.cover_bins);
    j["seq_item_fields"].push_back(o);
  }
  j["registers"] = json::array();
  for (const auto& r : bp.registers) {
    json o = {{"name", r.name},
              {"addr", text::hex(r.address)},
              {"width", r.width},
              {"access", std::string(to_string(r.access))}};
    if (!r.fields.empty()) {
      o["fields"] = json::array();
      for (const auto& f : r.fields) {
        json fo = {{"name", f.name}, {"lsb", f.lsb}, {"msb", f.msb}};
        if (f.default_value) fo["default"] = *f.default_value;
        o["fields"].push_back(fo);
      }
    }
    j["registers"].push_back(o);
  }
  j["bfms"] = json::array();
  for (const auto& b : bp.bfms) {
    json conns = json::object();
    for (const auto& [k, v] : b.connections) conns[k] = v;
    j["bfms"].push_back({{"kind", std::string(to_string(b.kind))}, {"name", b.instance_name}, {"connections", conns}});
  }
  if (!bp.coverpoints.empty()) {
    j["coverpoints"] = json::array();
    for (const auto& c : bp.coverpoints) j["coverpoints"].push_back({{"field", c.field}, {"bins", bins_to_json(c.bins)}});
  }
  return j;
}

std::string serialize_blueprint(const Blueprint& bp) { return to_json(bp).dump(2) + "\n"; }

}  // namespace tbsynth
