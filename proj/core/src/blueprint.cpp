#include "tbsynth/blueprint.hpp"

#include <algorithm>
#include <set>

#include "text_util.hpp"

namespace tbsynth {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kDirect: return "direct";
    case Protocol::kWishbone: return "wishbone";
    case Protocol::kAxi4Lite: return "axi4lite";
  }
  return "?";
}

std::string_view to_string(HandshakeVariant v) {
  switch (v) {
    case HandshakeVariant::kReadyDone: return "ready_done";
    case HandshakeVariant::kValidReady: return "valid_ready";
    case HandshakeVariant::kBusy: return "busy";
    case HandshakeVariant::kStreaming: return "streaming";
  }
  return "?";
}

std::string protocol_scope_name(const ProtocolSpec& p) {
  if (p.type == Protocol::kDirect) return "direct_" + std::string(to_string(p.variant));
  return std::string(to_string(p.type));
}

std::string_view to_string(PortDirection d) {
  switch (d) {
    case PortDirection::kInput: return "input";
    case PortDirection::kOutput: return "output";
    case PortDirection::kInout: return "inout";
  }
  return "?";
}

std::string_view to_string(PortClass c) {
  switch (c) {
    case PortClass::kClock: return "clock";
    case PortClass::kReset: return "reset";
    case PortClass::kPad: return "pad";
    case PortClass::kBusHandshake: return "bus_handshake";
    case PortClass::kStimulus: return "stimulus";
  }
  return "?";
}

std::string_view to_string(FieldDirection d) {
  return d == FieldDirection::kToDut ? "to_dut" : "from_dut";
}

std::string_view to_string(FieldRole r) {
  switch (r) {
    case FieldRole::kData: return "data";
    case FieldRole::kConfig: return "config";
    case FieldRole::kControl: return "control";
    case FieldRole::kStatus: return "status";
  }
  return "?";
}

std::string_view to_string(RegisterAccess a) {
  switch (a) {
    case RegisterAccess::kReadWrite: return "rw";
    case RegisterAccess::kReadOnly: return "ro";
    case RegisterAccess::kWriteOnly: return "wo";
  }
  return "?";
}

std::string_view to_string(BfmKind k) {
  switch (k) {
    case BfmKind::kGpio: return "gpio";
    case BfmKind::kI2cSlave: return "i2c_slave";
    case BfmKind::kMiiPhy: return "mii_phy";
    case BfmKind::kSdramModel: return "sdram_model";
    case BfmKind::kSpiSlave: return "spi_slave";
    case BfmKind::kUartSerial: return "uart_serial";
    case BfmKind::kWishboneSlave: return "wishbone_slave";
  }
  return "?";
}

const std::vector<BfmKind>& all_bfm_kinds() {
  static const std::vector<BfmKind> kinds = {
      BfmKind::kGpio,      BfmKind::kI2cSlave,  BfmKind::kMiiPhy,       BfmKind::kSdramModel,
      BfmKind::kSpiSlave,  BfmKind::kUartSerial, BfmKind::kWishboneSlave};
  return kinds;
}

std::optional<BfmKind> bfm_kind_from_string(std::string_view s) {
  for (BfmKind k : all_bfm_kinds()) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

const PortDecl* Blueprint::find_port(std::string_view name) const {
  for (const auto& p : ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const SeqItemField* Blueprint::find_field(std::string_view name) const {
  for (const auto& f : seq_item_fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const RegisterDecl* Blueprint::find_register(std::string_view name) const {
  for (const auto& r : registers) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const RegisterDecl* Blueprint::find_register_at(std::uint64_t address) const {
  for (const auto& r : registers) {
    if (r.address == address) return &r;
  }
  return nullptr;
}

const BfmDecl* Blueprint::find_bfm(std::string_view instance_name) const {
  for (const auto& b : bfms) {
    if (b.instance_name == instance_name) return &b;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

const ClassifierLexicon& default_lexicon() {
  static const ClassifierLexicon lex = [] {
    ClassifierLexicon l;
    l.clock = {"clk", "clock", "*_clk", "clk_*", "*_clk_*", "aclk", "*_aclk", "*_clock"};
    l.reset = {"rst", "reset", "*_rst*", "*rstn*", "rst_*", "reset_*", "*_reset*", "aresetn",
               "*_aresetn"};
    l.pad = {"*_pad", "pad_*", "*_pad_*", "*_io"};
    l.handshake["wishbone"] = {"cyc", "stb", "ack", "err", "rty", "stall"};
    l.handshake["axi4lite"] = {"*valid", "*ready", "bresp", "rresp"};
    l.handshake["direct_ready_done"] = {"start", "ready", "done"};
    l.handshake["direct_valid_ready"] = {"valid", "ready", "vld", "rdy"};
    l.handshake["direct_busy"] = {"start", "busy"};
    l.handshake["direct_streaming"] = {"valid", "ready", "vld", "rdy", "last", "sop", "eop"};
    return l;
  }();
  return lex;
}

namespace {

bool any_glob(const std::vector<std::string>& globs, std::string_view name) {
  return std::any_of(globs.begin(), globs.end(),
                     [&](const std::string& g) { return text::glob_match(g, name); });
}

}  // namespace

PortClass classify_port(std::string_view name, const ProtocolSpec& protocol,
                        const ClassifierLexicon& lexicon) {
  if (any_glob(lexicon.clock, name)) return PortClass::kClock;
  if (any_glob(lexicon.reset, name)) return PortClass::kReset;
  if (auto it = lexicon.handshake.find(protocol_scope_name(protocol));
      it != lexicon.handshake.end()) {
    for (const auto& tok : text::split(text::to_lower(name), '_')) {
      if (any_glob(it->second, tok)) return PortClass::kBusHandshake;
    }
  }
  if (any_glob(lexicon.pad, name)) return PortClass::kPad;
  return PortClass::kStimulus;
}

std::vector<PortDecl> classify_ports(std::vector<PortDecl> ports, const ProtocolSpec& protocol,
                                     const ClassifierLexicon& lexicon) {
  for (auto& p : ports) p.port_class = classify_port(p.name, protocol, lexicon);
  return ports;
}

// ---------------------------------------------------------------------------

namespace {

struct RoleRule {
  std::string role;
  std::vector<std::string> tokens;
  std::optional<PortDirection> direction;
};

const std::vector<RoleRule>& role_rules(const ProtocolSpec& p) {
  static const std::vector<RoleRule> wishbone = {
      {"adr", {"adr", "addr", "address"}, PortDirection::kInput},
      {"dat_w", {"dat", "data"}, PortDirection::kInput},
      {"dat_r", {"dat", "data"}, PortDirection::kOutput},
      {"we", {"we"}, PortDirection::kInput},
      {"sel", {"sel"}, PortDirection::kInput},
      {"cyc", {"cyc"}, PortDirection::kInput},
      {"stb", {"stb"}, PortDirection::kInput},
      {"ack", {"ack"}, PortDirection::kOutput},
      {"err", {"err"}, PortDirection::kOutput},
      {"rty", {"rty"}, PortDirection::kOutput},
  };
  static const std::vector<RoleRule> axi = [] {
    std::vector<RoleRule> r;
    for (const char* in : {"awaddr", "awprot", "awvalid", "wdata", "wstrb", "wvalid", "bready",
                           "araddr", "arprot", "arvalid", "rready"}) {
      r.push_back({in, {in}, PortDirection::kInput});
    }
    for (const char* out : {"awready", "wready", "bresp", "bvalid", "arready", "rdata", "rresp",
                            "rvalid"}) {
      r.push_back({out, {out}, PortDirection::kOutput});
    }
    return r;
  }();
  static const std::vector<RoleRule> ready_done = {
      {"start", {"start"}, PortDirection::kInput},
      {"ready", {"ready", "rdy"}, PortDirection::kOutput},
      {"done", {"done"}, PortDirection::kOutput},
  };
  static const std::vector<RoleRule> valid_ready = {
      {"valid", {"valid", "vld"}, PortDirection::kInput},
      {"ready", {"ready", "rdy"}, PortDirection::kOutput},
  };
  static const std::vector<RoleRule> busy = {
      {"start", {"start"}, PortDirection::kInput},
      {"busy", {"busy"}, PortDirection::kOutput},
  };
  static const std::vector<RoleRule> streaming = {
      {"valid", {"valid", "vld"}, PortDirection::kInput},
      {"ready", {"ready", "rdy"}, PortDirection::kOutput},
      {"last", {"last", "eop"}, PortDirection::kInput},
  };
  switch (p.type) {
    case Protocol::kWishbone: return wishbone;
    case Protocol::kAxi4Lite: return axi;
    case Protocol::kDirect:
      switch (p.variant) {
        case HandshakeVariant::kReadyDone: return ready_done;
        case HandshakeVariant::kValidReady: return valid_ready;
        case HandshakeVariant::kBusy: return busy;
        case HandshakeVariant::kStreaming: return streaming;
      }
  }
  return wishbone;
}

}  // namespace

const std::vector<std::string>& required_bus_roles(const ProtocolSpec& p) {
  static const std::vector<std::string> wishbone = {"adr", "dat_w", "dat_r", "we",
                                                    "cyc", "stb",   "ack"};
  static const std::vector<std::string> axi = {"awaddr", "awvalid", "awready", "wdata",
                                               "wvalid", "wready",  "bvalid",  "bready",
                                               "araddr", "arvalid", "arready", "rdata",
                                               "rvalid", "rready"};
  static const std::vector<std::string> ready_done = {"start", "done"};
  static const std::vector<std::string> valid_ready = {"valid", "ready"};
  static const std::vector<std::string> busy = {"start", "busy"};
  static const std::vector<std::string> streaming = {"valid", "ready"};
  switch (p.type) {
    case Protocol::kWishbone: return wishbone;
    case Protocol::kAxi4Lite: return axi;
    case Protocol::kDirect:
      switch (p.variant) {
        case HandshakeVariant::kReadyDone: return ready_done;
        case HandshakeVariant::kValidReady: return valid_ready;
        case HandshakeVariant::kBusy: return busy;
        case HandshakeVariant::kStreaming: return streaming;
      }
  }
  return wishbone;
}

BusRoles resolve_bus_roles(const Blueprint& bp) {
  BusRoles roles;
  std::set<std::string> taken;
  for (const auto& rule : role_rules(bp.protocol)) {
    const PortDecl* best = nullptr;
    int best_score = -1;
    for (const auto& port : bp.ports) {
      if (taken.count(port.name)) continue;
      if (port.port_class == PortClass::kClock || port.port_class == PortClass::kReset) continue;
      if (rule.direction && port.direction != *rule.direction) continue;
      const auto toks = text::name_tokens(port.name);
      const bool hit = std::any_of(toks.begin(), toks.end(), [&](const std::string& t) {
        return std::find(rule.tokens.begin(), rule.tokens.end(), t) != rule.tokens.end();
      });
      if (!hit) continue;
      // Prefer names carrying a bus prefix; otherwise the first declared port wins.
      int score = 0;
      for (const auto& t : toks) {
        if (t == "wb" || t == "axi" || t == "axil" || t == "s" || t == "m") score = 1;
      }
      if (score > best_score) {
        best = &port;
        best_score = score;
      }
    }
    if (best) {
      roles[rule.role] = best->name;
      taken.insert(best->name);
    }
  }
  return roles;
}

int bus_data_width(const Blueprint& bp) {
  int w = 0;
  for (const auto& r : bp.registers) w = std::max(w, r.width);
  return w == 0 ? 32 : w;
}

// ---------------------------------------------------------------------------

std::string BlueprintError::to_string() const {
  std::string kind_name;
  switch (kind) {
    case BlueprintErrorKind::kJsonSyntax: kind_name = "JsonSyntax"; break;
    case BlueprintErrorKind::kSchemaViolation: kind_name = "SchemaViolation"; break;
    case BlueprintErrorKind::kInvariantViolation: kind_name = "InvariantViolation"; break;
  }
  std::string out = kind_name;
  if (!path.empty()) out += " at " + path;
  if (!expected.empty() || !found.empty()) {
    out += ": expected " + expected + ", found " + found;
  }
  if (!description.empty()) out += ": " + description;
  return out;
}

namespace {

BlueprintError invariant(std::string path, std::string description) {
  BlueprintError e;
  e.kind = BlueprintErrorKind::kInvariantViolation;
  e.path = std::move(path);
  e.description = std::move(description);
  return e;
}

void check_bins(const std::vector<CoverBin>& bins, int width, const std::string& path,
                std::vector<BlueprintError>& errors) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto& b = bins[i];
    const auto p = path + "[" + std::to_string(i) + "]";
    if (!text::is_identifier(b.name)) errors.push_back(invariant(p, "bin name is not an identifier"));
    if (!names.insert(b.name).second) errors.push_back(invariant(p, "duplicate bin name " + b.name));
    if (b.kind == CoverBinKind::kRange && b.lo > b.hi) {
      errors.push_back(invariant(p, "range bin has lo > hi"));
    }
    if (width > 0 && b.kind != CoverBinKind::kAutoWidth &&
        (!text::fits_in_width(b.lo, width) || !text::fits_in_width(b.hi, width))) {
      errors.push_back(invariant(p, "bin bound does not fit in " + std::to_string(width) + " bits"));
    }
  }
}

}  // namespace

std::vector<BlueprintError> check_invariants(const Blueprint& bp) {
  std::vector<BlueprintError> errors;
  if (bp.design_name.empty() || !text::is_identifier(bp.design_name)) {
    errors.push_back(invariant("$.design_name", "design_name must be a nonempty identifier"));
  }
  std::set<std::string> port_names;
  for (std::size_t i = 0; i < bp.ports.size(); ++i) {
    const auto& p = bp.ports[i];
    const auto path = "$.ports[" + std::to_string(i) + "]";
    if (!text::is_identifier(p.name)) errors.push_back(invariant(path, "port name is not an identifier"));
    if (p.width < 1 || p.width > 1024) errors.push_back(invariant(path, "port width out of range"));
    if (!port_names.insert(p.name).second) errors.push_back(invariant(path, "duplicate port " + p.name));
  }
  const PortDecl* clk = bp.find_port(bp.clock);
  if (!clk) {
    errors.push_back(invariant("$.clock", "clock signal '" + bp.clock + "' is not in the port list"));
  }
  if (!bp.find_port(bp.reset.name)) {
    errors.push_back(invariant("$.reset.name",
                               "reset signal '" + bp.reset.name + "' is not in the port list"));
  }
  if (bp.ack_timeout && (*bp.ack_timeout < 1 || *bp.ack_timeout > (1 << 24))) {
    errors.push_back(invariant("$.ack_timeout", "ack_timeout must be in 1..16777216"));
  }

  // Registers first: field mapping depends on them.
  std::set<std::uint64_t> addrs;
  std::set<std::string> reg_names;
  std::map<std::string, int> reg_field_count;  // register-field names -> occurrences
  for (std::size_t i = 0; i < bp.registers.size(); ++i) {
    const auto& r = bp.registers[i];
    const auto path = "$.registers[" + std::to_string(i) + "]";
    if (!text::is_identifier(r.name)) errors.push_back(invariant(path, "register name is not an identifier"));
    if (r.width < 1 || r.width > 64) errors.push_back(invariant(path, "register width must be 1..64"));
    if (!addrs.insert(r.address).second) {
      errors.push_back(invariant(path, "duplicate register address " + text::hex(r.address)));
    }
    if (!reg_names.insert(r.name).second) errors.push_back(invariant(path, "duplicate register " + r.name));
    for (std::size_t j = 0; j < r.fields.size(); ++j) {
      const auto& f = r.fields[j];
      const auto fpath = path + ".fields[" + std::to_string(j) + "]";
      if (f.lsb < 0 || f.msb < f.lsb || f.msb >= r.width) {
        errors.push_back(invariant(fpath, "bit range [" + std::to_string(f.msb) + ":" +
                                              std::to_string(f.lsb) + "] outside register width"));
      } else if (f.default_value && !text::fits_in_width(*f.default_value, f.width())) {
        errors.push_back(invariant(fpath, "default does not fit in field width"));
      }
      reg_field_count[f.name]++;
    }
  }
  if (bp.protocol.is_bus() && bp.registers.empty()) {
    errors.push_back(invariant("$.registers", "bus protocol " + protocol_scope_name(bp.protocol) +
                                                  " requires a nonempty register map"));
  }
  if (!bp.protocol.is_bus() && !bp.registers.empty()) {
    errors.push_back(invariant("$.registers", "register map requires a bus protocol"));
  }

  std::set<std::string> field_names;
  for (std::size_t i = 0; i < bp.seq_item_fields.size(); ++i) {
    const auto& f = bp.seq_item_fields[i];
    const auto path = "$.seq_item_fields[" + std::to_string(i) + "]";
    if (!text::is_identifier(f.name)) errors.push_back(invariant(path, "field name is not an identifier"));
    if (f.width < 1 || f.width > 64) errors.push_back(invariant(path, "field width must be 1..64"));
    if (!field_names.insert(f.name).second) {
      errors.push_back(invariant(path, "duplicate seq_item field " + f.name));
    }
    if (f.default_value && !text::fits_in_width(*f.default_value, f.width)) {
      errors.push_back(invariant(path, "default does not fit in " + std::to_string(f.width) + " bits"));
    }
    int targets = 0;
    if (const PortDecl* port = bp.find_port(f.name)) {
      ++targets;
      if (port->port_class != PortClass::kStimulus) {
        errors.push_back(invariant(path, "field '" + f.name + "' names a non-stimulus signal (" +
                                             std::string(to_string(port->port_class)) + ")"));
      }
    }
    if (reg_names.count(f.name)) ++targets;
    if (auto it = reg_field_count.find(f.name); it != reg_field_count.end()) targets += it->second;
    if (targets == 0) {
      errors.push_back(invariant(path, "field '" + f.name + "' maps to no port or register field"));
    } else if (targets > 1) {
      errors.push_back(invariant(path, "field '" + f.name + "' maps to more than one target"));
    }
    if (f.cover_bins) check_bins(*f.cover_bins, f.width, path + ".cover_bins", errors);
  }
  for (std::size_t i = 0; i < bp.coverpoints.size(); ++i) {
    const auto& c = bp.coverpoints[i];
    const SeqItemField* f = bp.find_field(c.field);
    check_bins(c.bins, f ? f->width : 0, "$.coverpoints[" + std::to_string(i) + "].bins", errors);
  }

  std::set<std::string> bfm_names;
  for (std::size_t i = 0; i < bp.bfms.size(); ++i) {
    const auto& b = bp.bfms[i];
    const auto path = "$.bfms[" + std::to_string(i) + "]";
    if (!text::is_identifier(b.instance_name)) errors.push_back(invariant(path, "BFM name is not an identifier"));
    if (!bfm_names.insert(b.instance_name).second) {
      errors.push_back(invariant(path, "duplicate BFM instance " + b.instance_name));
    }
    for (const auto& [bfm_port, dut_port] : b.connections) {
      if (!bp.find_port(dut_port)) {
        errors.push_back(invariant(path + ".connections." + bfm_port,
                                   "connection target '" + dut_port + "' is not a DUT port"));
      }
    }
  }
  std::set<std::string> agent_names;
  for (std::size_t i = 0; i < bp.agents.size(); ++i) {
    if (!text::is_identifier(bp.agents[i].name) || !agent_names.insert(bp.agents[i].name).second) {
      errors.push_back(invariant("$.agents[" + std::to_string(i) + "]",
                                 "agent names must be unique identifiers"));
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------

std::string ConsistencyIssue::to_string() const {
  std::string layer_name;
  switch (layer) {
    case ConsistencyLayer::kTransaction: layer_name = "transaction"; break;
    case ConsistencyLayer::kMonitor: layer_name = "monitor"; break;
    case ConsistencyLayer::kCoverage: layer_name = "coverage"; break;
  }
  switch (kind) {
    case ConsistencyIssueKind::kWidthMismatch:
      return "WidthMismatch(" + name + ", expected " + std::to_string(expected) + ", found " +
             std::to_string(found) + ") [" + layer_name + "]";
    case ConsistencyIssueKind::kPhantomSignal:
      return "PhantomSignal(" + name + ") [" + layer_name + "]";
    case ConsistencyIssueKind::kPhantomCoverpoint:
      return "PhantomCoverpoint(" + name + ") [" + layer_name + "]";
  }
  return name;
}

std::vector<MonitorSignal> monitor_map(const Blueprint& bp) {
  std::vector<MonitorSignal> out;
  const BusRoles roles = resolve_bus_roles(bp);
  const int dw = bus_data_width(bp);
  static const std::set<std::string> data_roles = {"dat_w", "dat_r", "wdata", "rdata"};
  static const std::set<std::string> addr_roles = {"adr", "awaddr", "araddr"};
  static const std::set<std::string> resp_roles = {"bresp", "rresp"};
  static const std::set<std::string> strobe_roles = {"sel", "wstrb"};
  static const std::set<std::string> prot_roles = {"awprot", "arprot"};

  for (const auto& [role, port_name] : roles) {
    const PortDecl* port = bp.find_port(port_name);
    int expected = 1;
    if (data_roles.count(role)) {
      expected = bp.protocol.is_bus() ? dw : port->width;
    } else if (addr_roles.count(role)) {
      expected = port->width;
    } else if (resp_roles.count(role)) {
      expected = 2;
    } else if (prot_roles.count(role)) {
      expected = 3;
    } else if (strobe_roles.count(role)) {
      expected = dw >= 8 ? dw / 8 : 1;
    }
    out.push_back({port_name, expected, protocol_scope_name(bp.protocol) + "." + role});
  }
  for (const auto& role : required_bus_roles(bp.protocol)) {
    if (!roles.count(role)) {
      out.push_back({"", 0, protocol_scope_name(bp.protocol) + "." + role});
    }
  }
  return out;
}

ConsistencyReport consistency_check(const Blueprint& bp) {
  ConsistencyReport report;
  auto add = [&](ConsistencyIssueKind k, ConsistencyLayer l, std::string name, int e = 0,
                 int f = 0) { report.issues.push_back({k, l, std::move(name), e, f}); };

  // Layer 1: transaction interface against RTL ports and register fields.
  for (const auto& f : bp.seq_item_fields) {
    if (const PortDecl* port = bp.find_port(f.name)) {
      if (port->width != f.width) {
        add(ConsistencyIssueKind::kWidthMismatch, ConsistencyLayer::kTransaction, f.name, port->width,
            f.width);
      }
      const bool port_drives_dut = port->direction != PortDirection::kOutput;
      if ((f.direction == FieldDirection::kToDut) != port_drives_dut &&
          port->direction != PortDirection::kInout) {
        add(ConsistencyIssueKind::kPhantomSignal, ConsistencyLayer::kTransaction,
            f.name + " (direction disagrees with RTL port)");
      }
      continue;
    }
    if (const RegisterDecl* reg = bp.find_register(f.name)) {
      if (reg->width != f.width) {
        add(ConsistencyIssueKind::kWidthMismatch, ConsistencyLayer::kTransaction, f.name, reg->width,
            f.width);
      }
      continue;
    }
    bool found = false;
    for (const auto& r : bp.registers) {
      for (const auto& rf : r.fields) {
        if (rf.name != f.name) continue;
        found = true;
        if (rf.width() != f.width) {
          add(ConsistencyIssueKind::kWidthMismatch, ConsistencyLayer::kTransaction, f.name,
              rf.width(), f.width);
        }
      }
    }
    if (!found) add(ConsistencyIssueKind::kPhantomSignal, ConsistencyLayer::kTransaction, f.name);
  }

  // Layer 2: monitor mapping against the RTL interface.
  for (const auto& m : monitor_map(bp)) {
    if (m.signal.empty()) {
      add(ConsistencyIssueKind::kPhantomSignal, ConsistencyLayer::kMonitor, m.source);
      continue;
    }
    const PortDecl* port = bp.find_port(m.signal);
    if (!port) {
      add(ConsistencyIssueKind::kPhantomSignal, ConsistencyLayer::kMonitor, m.signal);
    } else if (port->width != m.expected_width) {
      add(ConsistencyIssueKind::kWidthMismatch, ConsistencyLayer::kMonitor, m.signal,
          m.expected_width, port->width);
    }
  }

  // Layer 3: every cover declaration targets a declared seq_item field.
  for (const auto& c : bp.coverpoints) {
    if (!bp.find_field(c.field)) {
      add(ConsistencyIssueKind::kPhantomCoverpoint, ConsistencyLayer::kCoverage, c.field);
    }
  }
  return report;
}

BlueprintRejected::BlueprintRejected(std::vector<std::string> reasons)
    : Error("blueprint rejected: " + (reasons.empty() ? std::string("unknown reason") : reasons.front()) +
            (reasons.size() > 1 ? " (+" + std::to_string(reasons.size() - 1) + " more)" : "")),
      reasons_(std::move(reasons)) {}

}  // namespace tbsynth
