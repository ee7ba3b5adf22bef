#include <algorithm>
#include <set>

#include "bus_view.hpp"
#include "text_util.hpp"
#include "tbsynth/templates.hpp"

namespace tbsynth {
namespace detail {

using nlohmann::json;

bool BusView::is_member(const std::string& name) const { return member(name) != nullptr; }

const BusMember* BusView::member(const std::string& name) const {
  for (const auto& m : members) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::string sv_range(int width) {
  if (width <= 1) return "";
  return "[" + std::to_string(width - 1) + ":0] ";
}

std::uint64_t register_reset_value(const RegisterDecl& r) {
  std::uint64_t v = 0;
  for (const auto& f : r.fields) {
    if (f.default_value) v |= (*f.default_value & text::width_mask(f.width())) << f.lsb;
  }
  return v & text::width_mask(r.width);
}

BusView make_bus_view(const Blueprint& bp) {
  BusView v;
  v.is_bus = bp.protocol.is_bus();
  v.roles = resolve_bus_roles(bp);
  auto role = [&](const char* r) -> std::string {
    auto it = v.roles.find(r);
    return it == v.roles.end() ? std::string() : it->second;
  };
  auto width_of = [&](const std::string& port) {
    const PortDecl* p = bp.find_port(port);
    return p ? p->width : 1;
  };
  std::vector<std::pair<std::string, bool>> wanted;  // port, rand
  switch (bp.protocol.type) {
    case Protocol::kWishbone:
      v.write_addr = v.read_addr = role("adr");
      v.wdata = role("dat_w");
      v.rdata = role("dat_r");
      wanted = {{v.write_addr, true}, {v.wdata, true}, {v.rdata, false}};
      break;
    case Protocol::kAxi4Lite:
      v.write_addr = role("awaddr");
      v.read_addr = role("araddr");
      v.wdata = role("wdata");
      v.rdata = role("rdata");
      wanted = {{v.write_addr, true}, {v.read_addr, true}, {v.wdata, true}, {v.rdata, false}};
      break;
    case Protocol::kDirect:
      if (!role("last").empty()) wanted = {{role("last"), true}};
      break;
  }
  if (v.is_bus) {
    v.addr_width = width_of(v.write_addr);
    v.data_width = bus_data_width(bp);
  }
  std::set<std::string> seen;
  for (const auto& [port, rand] : wanted) {
    if (port.empty() || !seen.insert(port).second) continue;
    if (const SeqItemField* f = bp.find_field(port)) {
      v.members.push_back({port, f->width, f->direction == FieldDirection::kToDut});
    } else {
      v.members.push_back({port, width_of(port), rand});
    }
  }
  return v;
}

FieldTarget resolve_field(const Blueprint& bp, const BusView& bus, const std::string& name) {
  FieldTarget t;
  t.name = name;
  if (name == "op") {
    t.kind = FieldTarget::kOp;
    t.width = 2;
    return t;
  }
  if (const BusMember* m = bus.member(name)) {
    t.kind = FieldTarget::kBusMember;
    t.width = m->width;
    return t;
  }
  if (const SeqItemField* f = bp.find_field(name); f && bp.find_port(name)) {
    t.kind = FieldTarget::kPort;
    t.width = f->width;
    return t;
  }
  if (const RegisterDecl* r = bp.find_register(name)) {
    t.kind = FieldTarget::kRegister;
    t.width = r->width;
    t.reg = r;
    return t;
  }
  for (const auto& r : bp.registers) {
    for (const auto& rf : r.fields) {
      if (rf.name == name) {
        t.kind = FieldTarget::kRegisterField;
        t.width = rf.width();
        t.reg = &r;
        t.lsb = rf.lsb;
        return t;
      }
    }
  }
  return t;
}

}  // namespace detail

namespace {

using nlohmann::json;
using detail::sv_range;

std::string bin_value(std::uint64_t v, int width) { return text::sv_hex(v, width); }

json bin_json(const std::string& name, const std::string& spec) { return {{"name", name}, {"spec", spec}}; }

void append_bins(json& out, const std::vector<CoverBin>& bins, int width) {
  for (const auto& b : bins) {
    switch (b.kind) {
      case CoverBinKind::kValue:
        out.push_back(bin_json(b.name, "{" + bin_value(b.lo, width) + "}"));
        break;
      case CoverBinKind::kRange:
        out.push_back(
            bin_json(b.name, "{[" + bin_value(b.lo, width) + ":" + bin_value(b.hi, width) + "]}"));
        break;
      case CoverBinKind::kAutoWidth:
        for (const auto& a : auto_bins(width)) out.push_back(bin_json(b.name + "_" + a.name, a.spec));
        break;
    }
  }
}

json bfm_entry(const Blueprint& bp, const BfmDecl& decl, const TemplateLibrary& library) {
  const BfmTemplateInfo* info = library.bfm_info(decl.kind);
  if (!info) {
    throw BfmPortMismatch("no BFM template for kind " + std::string(to_string(decl.kind)));
  }
  std::map<std::string, int> params = info->params;
  std::set<std::string> overridden;
  for (const auto& [bfm_port, dut_port] : decl.connections) {
    if (!info->find_port(bfm_port)) {
      throw BfmPortMismatch("BFM " + decl.instance_name + " (" + std::string(to_string(decl.kind)) +
                            ") has no port '" + bfm_port + "'");
    }
  }
  json conns = json::array();
  for (const auto& spec : info->ports) {
    json c = {{"bfm_port", spec.name}, {"expr", ""}};
    auto it = decl.connections.find(spec.name);
    if (it != decl.connections.end()) {
      const PortDecl* dut = bp.find_port(it->second);
      if (!dut) throw BfmPortMismatch("BFM connection target '" + it->second + "' is not a DUT port");
      const bool ok_dir = dut->direction == PortDirection::kInout ||
                          (spec.direction == PortDirection::kInput) == (dut->direction == PortDirection::kOutput);
      if (!ok_dir) {
        throw BfmPortMismatch("BFM port " + decl.instance_name + "." + spec.name + " (" +
                              std::string(to_string(spec.direction)) + ") cannot connect to DUT " +
                              std::string(to_string(dut->direction)) + " " + dut->name);
      }
      if (auto lit = text::parse_unsigned(spec.width)) {
        if (static_cast<int>(*lit) != dut->width) {
          throw BfmPortMismatch("BFM port " + decl.instance_name + "." + spec.name + " is " +
                                spec.width + " bits, DUT port " + dut->name + " is " +
                                std::to_string(dut->width));
        }
      } else {
        auto pit = params.find(spec.width);
        if (pit == params.end()) {
          throw BfmPortMismatch("BFM port width parameter '" + spec.width + "' is undeclared");
        }
        if (overridden.count(spec.width) && pit->second != dut->width) {
          throw BfmPortMismatch("BFM parameter " + spec.width + " bound to conflicting widths");
        }
        pit->second = dut->width;
        overridden.insert(spec.width);
      }
      c["expr"] = "vif." + dut->name;
    } else if (spec.direction == PortDirection::kInput) {
      c["expr"] = "'0";
    }
    conns.push_back(c);
  }
  json plist = json::array();
  for (const auto& [name, value] : params) plist.push_back({{"name", name}, {"value", value}});
  return {{"name", decl.instance_name},
          {"kind", std::string(to_string(decl.kind))},
          {"module", bp.design_name + "_" + decl.instance_name + "_bfm"},
          {"connections", conns},
          {"params", plist},
          {"has_params", !plist.empty()},
          {"has_memory", info->has_memory}};
}

}  // namespace

std::vector<CoverBinPlan> auto_bins(int width) {
  std::vector<CoverBinPlan> out;
  if (width <= kEnumerateMaxWidth) {
    const std::uint64_t n = std::uint64_t{1} << width;
    for (std::uint64_t v = 0; v < n; ++v) {
      out.push_back({"val_" + std::to_string(v), "{" + bin_value(v, width) + "}"});
    }
    return out;
  }
  const std::uint64_t step = std::uint64_t{1} << (width - 4);
  for (int k = 0; k < kAutoRangeBins; ++k) {
    const std::uint64_t lo = step * static_cast<std::uint64_t>(k);
    const std::uint64_t hi = lo + (step - 1);
    out.push_back({"range_" + std::to_string(k),
                   "{[" + bin_value(lo, width) + ":" + bin_value(hi, width) + "]}"});
  }
  return out;
}

nlohmann::json build_render_context(const Blueprint& bp, const StrategyMap& strategies,
                                    const TemplateLibrary& library) {
  const detail::BusView bus = detail::make_bus_view(bp);
  json ctx;
  ctx["design_name"] = bp.design_name;
  ctx["protocol"] = protocol_scope_name(bp.protocol);
  ctx["is_bus"] = bus.is_bus;
  if (!bp.clock.empty()) ctx["clock"] = bp.clock;
  if (!bp.reset.name.empty()) {
    ctx["reset"] = bp.reset.name;
    ctx["reset_active"] = bp.reset.active_high ? "1'b1" : "1'b0";
    ctx["reset_inactive"] = bp.reset.active_high ? "1'b0" : "1'b1";
  }
  ctx["ack_timeout"] = bp.effective_ack_timeout();
  ctx["agent_name"] = bp.agents.empty() ? std::string("agent") : bp.agents.front().name;

  json ports = json::array();
  for (const auto& p : bp.ports) {
    ports.push_back({{"name", p.name},
                     {"width", p.width},
                     {"range", sv_range(p.width)},
                     {"dir", std::string(to_string(p.direction))},
                     {"class", std::string(to_string(p.port_class))}});
  }
  ctx["ports"] = ports;

  json roles = json::object();
  for (const auto& [role, port] : bus.roles) roles[role] = port;
  ctx["bus"] = roles;
  ctx["bus_view"] = {{"write_addr", bus.write_addr},
                     {"read_addr", bus.read_addr},
                     {"wdata", bus.wdata},
                     {"rdata", bus.rdata},
                     {"addr_width", bus.addr_width},
                     {"data_width", bus.data_width}};
  json members = json::array();
  for (const auto& m : bus.members) {
    members.push_back({{"name", m.name}, {"width", m.width}, {"range", sv_range(m.width)}, {"rand", m.rand}});
  }
  ctx["bus_members"] = members;

  std::set<std::string> bfm_ports;
  for (const auto& b : bp.bfms) {
    for (const auto& [_, dut] : b.connections) bfm_ports.insert(dut);
  }

  json fields = json::array();
  json sb_in = json::array();
  json sb_out = json::array();
  for (const auto& f : bp.seq_item_fields) {
    if (bus.is_member(f.name)) continue;  // declared with the bus members
    json jf = {{"name", f.name},
               {"width", f.width},
               {"range", sv_range(f.width)},
               {"direction", std::string(to_string(f.direction))},
               {"role", std::string(to_string(f.role))},
               {"rand", f.direction == FieldDirection::kToDut},
               {"fixed", false}};
    auto st = strategies.find(f.name);
    if (st != strategies.end()) {
      jf["strategy"] = std::string(to_string(st->second.kind));
      if (st->second.kind == StrategyKind::kFixed) {
        jf["fixed"] = true;
        jf["rand"] = false;
        jf["fixed_value"] = text::sv_hex(st->second.fixed_value, f.width);
      }
    }
    fields.push_back(jf);
    if (const PortDecl* p = bp.find_port(f.name); p && !bfm_ports.count(p->name)) {
      json s = {{"name", f.name}, {"port", p->name}};
      (f.direction == FieldDirection::kToDut ? sb_in : sb_out).push_back(s);
    }
  }
  ctx["fields"] = fields;
  ctx["sideband_inputs"] = sb_in;
  ctx["sideband_outputs"] = sb_out;

  json regs = json::array();
  json rw_regs = json::array();
  const int aw = std::max(bus.addr_width, 1);
  for (const auto& r : bp.registers) {
    json jr = {{"name", r.name},
               {"addr", text::sv_hex(r.address, aw)},
               {"width", r.width},
               {"access", std::string(to_string(r.access))},
               {"readable", r.readable()},
               {"writable", r.writable()},
               {"reset_value", text::sv_hex(detail::register_reset_value(r), r.width)}};
    regs.push_back(jr);
    if (r.access == RegisterAccess::kReadWrite) rw_regs.push_back(jr);
  }
  ctx["registers"] = regs;
  ctx["rw_registers"] = rw_regs;
  ctx["has_registers"] = !bp.registers.empty();

  // Monitor events: when a transfer completes and which signals it carries.
  auto cond = [](std::initializer_list<std::string> sigs) {
    std::vector<std::string> parts;
    for (const auto& s : sigs) parts.push_back("vif." + s + " === 1'b1");
    return text::join(parts, " && ");
  };
  auto role = [&](const char* r) {
    auto it = bus.roles.find(r);
    return it == bus.roles.end() ? std::string() : it->second;
  };
  json sideband_caps = json::array();
  for (const auto& s : sb_in) sideband_caps.push_back({{"member", s["name"]}, {"signal", s["port"]}});
  for (const auto& s : sb_out) sideband_caps.push_back({{"member", s["name"]}, {"signal", s["port"]}});
  auto with_caps = [&](json caps) {
    for (const auto& c : sideband_caps) caps.push_back(c);
    return caps;
  };
  json events = json::array();
  switch (bp.protocol.type) {
    case Protocol::kWishbone:
      events.push_back({{"name", "bus_cycle"},
                        {"condition", cond({role("cyc"), role("stb"), role("ack")})},
                        {"op", "vif." + role("we") + " ? OP_WRITE : OP_READ"},
                        {"captures", with_caps({{{"member", bus.write_addr}, {"signal", bus.write_addr}},
                                                {{"member", bus.wdata}, {"signal", bus.wdata}},
                                                {{"member", bus.rdata}, {"signal", bus.rdata}}})}});
      break;
    case Protocol::kAxi4Lite:
      events.push_back({{"name", "write_response"},
                        {"condition", cond({role("bvalid"), role("bready")})},
                        {"op", "OP_WRITE"},
                        {"captures", with_caps({{{"member", bus.write_addr}, {"signal", bus.write_addr}},
                                                {{"member", bus.wdata}, {"signal", bus.wdata}}})}});
      events.push_back({{"name", "read_data"},
                        {"condition", cond({role("rvalid"), role("rready")})},
                        {"op", "OP_READ"},
                        {"captures", with_caps({{{"member", bus.read_addr}, {"signal", bus.read_addr}},
                                                {{"member", bus.rdata}, {"signal", bus.rdata}}})}});
      break;
    case Protocol::kDirect: {
      std::string c;
      switch (bp.protocol.variant) {
        case HandshakeVariant::kReadyDone: c = cond({role("done")}); break;
        case HandshakeVariant::kValidReady:
        case HandshakeVariant::kStreaming: c = cond({role("valid"), role("ready")}); break;
        case HandshakeVariant::kBusy:
          c = "vif." + role("start") + " === 1'b1 && vif." + role("busy") + " !== 1'b1";
          break;
      }
      json caps = json::array();
      for (const auto& m : bus.members) caps.push_back({{"member", m.name}, {"signal", m.name}});
      events.push_back(
          {{"name", "transfer"}, {"condition", c}, {"op", "OP_WRITE"}, {"captures", with_caps(caps)}});
      break;
    }
  }
  ctx["monitor_events"] = events;

  // Coverage: one coverpoint per seq_item field.
  json cps = json::array();
  for (const auto& f : bp.seq_item_fields) {
    json bins = json::array();
    if (f.cover_bins) append_bins(bins, *f.cover_bins, f.width);
    for (const auto& c : bp.coverpoints) {
      if (c.field == f.name) append_bins(bins, c.bins, f.width);
    }
    if (bins.empty()) {
      for (const auto& a : auto_bins(f.width)) bins.push_back(bin_json(a.name, a.spec));
    }
    json cp = {{"field", f.name},
               {"covergroup", "cg_" + f.name},
               {"coverpoint", "cp_" + f.name},
               {"range", sv_range(f.width)},
               {"bins", bins},
               {"source", "transaction"}};
    const detail::FieldTarget t = detail::resolve_field(bp, bus, f.name);
    if (t.kind == detail::FieldTarget::kRegister || t.kind == detail::FieldTarget::kRegisterField) {
      cp["source"] = "register";
      cp["addr"] = text::sv_hex(t.reg->address, aw);
      cp["lsb"] = t.lsb;
      cp["msb"] = t.lsb + t.width - 1;
      cp["on_write"] = t.reg->writable();
      cp["on_read"] = t.reg->readable();
    }
    cps.push_back(cp);
  }
  ctx["coverpoints"] = cps;

  json bfms = json::array();
  for (const auto& b : bp.bfms) bfms.push_back(bfm_entry(bp, b, library));
  ctx["bfms"] = bfms;
  ctx["has_bfms"] = !bfms.empty();

  json includes = json::array();
  for (auto k : {ComponentKind::kSeqItem, ComponentKind::kDriver, ComponentKind::kMonitor,
                 ComponentKind::kScoreboard, ComponentKind::kSubscriber}) {
    includes.push_back(component_file_name(k, bp, nullptr));
  }
  for (const auto& b : bp.bfms) includes.push_back(component_file_name(ComponentKind::kBfm, bp, &b));
  ctx["includes"] = includes;
  ctx["sequences_include"] = sequences_include_file_name(bp);
  return ctx;
}

}  // namespace tbsynth
