#include "tbsynth/templates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace tbsynth {

namespace {

struct KindName {
  ComponentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ComponentKind::kDriver, "driver"},         {ComponentKind::kMonitor, "monitor"},
    {ComponentKind::kScoreboard, "scoreboard"}, {ComponentKind::kSubscriber, "subscriber"},
    {ComponentKind::kSeqItem, "seq_item"},      {ComponentKind::kBfm, "bfm"},
    {ComponentKind::kTop, "top"},               {ComponentKind::kSequencePkg, "sequence_pkg"},
};

PortDirection parse_direction(const std::string& s, const std::string& origin) {
  if (s == "input") return PortDirection::kInput;
  if (s == "output") return PortDirection::kOutput;
  if (s == "inout") return PortDirection::kInout;
  throw TemplateSyntaxError(origin + ": bad @port direction '" + s + "'");
}

// "send_frame(len)" or "init()" or "init"
BfmActionSpec parse_action(const std::string& entry, const std::string& origin) {
  BfmActionSpec a;
  const auto open = entry.find('(');
  a.name = text::trim(entry.substr(0, open));
  if (open != std::string::npos) {
    const auto close = entry.find(')', open);
    if (close == std::string::npos) throw TemplateSyntaxError(origin + ": bad @action '" + entry + "'");
    for (auto& p : text::split(entry.substr(open + 1, close - open - 1), ',')) {
      auto name = text::trim(p);
      if (!name.empty()) a.params.push_back(name);
    }
  }
  if (!text::is_identifier(a.name)) throw TemplateSyntaxError(origin + ": bad @action '" + entry + "'");
  return a;
}

BfmTemplateInfo parse_bfm_info(const Template& t, BfmKind kind, const std::string& origin) {
  BfmTemplateInfo info;
  info.kind = kind;
  for (const auto& entry : t.attribute("port")) {
    auto parts = text::split_ws(entry);
    if (parts.size() != 3) throw TemplateSyntaxError(origin + ": @port needs name, direction, width");
    info.ports.push_back({parts[0], parse_direction(parts[1], origin), parts[2]});
  }
  for (const auto& entry : t.attribute("param")) {
    auto parts = text::split_ws(entry);
    auto v = parts.size() == 2 ? text::parse_unsigned(parts[1]) : std::nullopt;
    if (!v) throw TemplateSyntaxError(origin + ": @param needs name and integer default");
    info.params[parts[0]] = static_cast<int>(*v);
  }
  for (const auto& entry : t.attribute("action")) info.actions.push_back(parse_action(entry, origin));
  for (const auto& entry : t.attribute("smoke")) {
    auto parts = text::split_ws(entry);
    if (parts.empty()) continue;
    BfmSmokeAction s;
    s.action = parts[0];
    const BfmActionSpec* spec = info.find_action(s.action);
    if (!spec) throw TemplateSyntaxError(origin + ": @smoke names unknown action " + s.action);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      auto v = eq == std::string::npos ? std::nullopt : text::parse_unsigned(parts[i].substr(eq + 1));
      if (!v) throw TemplateSyntaxError(origin + ": bad @smoke argument " + parts[i]);
      s.params[parts[i].substr(0, eq)] = *v;
    }
    info.smoke.push_back(std::move(s));
  }
  for (const auto& entry : t.attribute("memory")) info.has_memory = text::trim(entry) == "yes";
  return info;
}

void build(const std::vector<std::pair<std::string, std::string>>& sources,
          std::vector<Template>& templates, std::map<BfmKind, BfmTemplateInfo>& infos) {
  for (const auto& [origin, text] : sources) {
    Template t = Template::parse(text, origin);
    if (!component_kind_from_string(t.kind())) {
      throw TemplateSyntaxError(origin + ": unknown component kind " + t.kind());
    }
    if (t.kind() == "bfm") {
      const auto& k = t.attribute("bfm");
      auto kind = k.size() == 1 ? bfm_kind_from_string(k[0]) : std::nullopt;
      if (!kind) throw TemplateSyntaxError(origin + ": BFM template needs one valid @bfm kind");
      infos[*kind] = parse_bfm_info(t, *kind, origin);
    }
    templates.push_back(std::move(t));
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(ComponentKind k) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == k) return kn.name;
  }
  return "?";
}

std::optional<ComponentKind> component_kind_from_string(std::string_view s) {
  for (const auto& kn : kKindNames) {
    if (s == kn.name) return kn.kind;
  }
  return std::nullopt;
}

const BfmActionSpec* BfmTemplateInfo::find_action(std::string_view name) const {
  for (const auto& a : actions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const BfmPortSpec* BfmTemplateInfo::find_port(std::string_view name) const {
  for (const auto& p : ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

TemplateLibrary TemplateLibrary::from_sources(
    const std::vector<std::pair<std::string, std::string>>& sources) {
  TemplateLibrary lib;
  build(sources, lib.templates_, lib.bfm_info_);
  return lib;
}

const TemplateLibrary& TemplateLibrary::builtin() {
  static const TemplateLibrary lib = [] {
    std::vector<std::pair<std::string, std::string>> sources;
    for (const auto& e : detail::embedded_templates()) sources.emplace_back(e.file_name, e.source);
    return from_sources(sources);
  }();
  return lib;
}

TemplateLibrary TemplateLibrary::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("template directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".tpl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto& f : files) sources.emplace_back(f.filename().string(), read_file(f));
  return from_sources(sources);
}

const Template* TemplateLibrary::find(ComponentKind kind, const ProtocolSpec& protocol) const {
  const std::string scope = protocol_scope_name(protocol);
  const Template* fallback = nullptr;
  for (const auto& t : templates_) {
    if (t.kind() != to_string(kind)) continue;
    if (t.scope() == scope) return &t;
    if (t.scope() == "protocol_agnostic" && !fallback) fallback = &t;
  }
  return fallback;
}

const Template* TemplateLibrary::find_bfm(BfmKind kind) const {
  for (const auto& t : templates_) {
    if (t.kind() != "bfm") continue;
    const auto& k = t.attribute("bfm");
    if (k.size() == 1 && k[0] == to_string(kind)) return &t;
  }
  return nullptr;
}

const BfmTemplateInfo* TemplateLibrary::bfm_info(BfmKind kind) const {
  auto it = bfm_info_.find(kind);
  return it == bfm_info_.end() ? nullptr : &it->second;
}

std::string component_file_name(ComponentKind kind, const Blueprint& bp, const BfmDecl* bfm) {
  switch (kind) {
    case ComponentKind::kBfm:
      return bp.design_name + "_" + (bfm ? bfm->instance_name : std::string("bfm")) + "_bfm.sv";
    case ComponentKind::kTop: return bp.design_name + "_tb_top.sv";
    case ComponentKind::kSequencePkg: return "sequence_pkg.sv";
    default: return bp.design_name + "_" + std::string(to_string(kind)) + ".sv";
  }
}

std::string sequences_include_file_name(const Blueprint& bp) { return bp.design_name + "_sequences.svh"; }

RenderedComponent render(const Template& tpl, const Blueprint& bp, const StrategyMap& strategies,
                         const BfmDecl* bfm, const TemplateLibrary& library) {
  const std::string scope = protocol_scope_name(bp.protocol);
  if (tpl.scope() != "protocol_agnostic" && tpl.scope() != scope) {
    throw ProtocolMismatch("template " + tpl.name() + " targets " + tpl.scope() + " but the design uses " +
                           scope);
  }
  const auto kind = component_kind_from_string(tpl.kind());
  if (!kind) throw TemplateSyntaxError("template " + tpl.name() + " has unknown kind " + tpl.kind());
  nlohmann::json ctx = build_render_context(bp, strategies, library);
  if (*kind == ComponentKind::kBfm) {
    if (!bfm) throw Error("BFM template " + tpl.name() + " needs a BFM declaration");
    for (const auto& b : ctx["bfms"]) {
      if (b["name"] == bfm->instance_name) ctx["bfm"] = b;
    }
  }
  RenderedComponent out;
  out.kind = *kind;
  out.file_name = component_file_name(*kind, bp, bfm);
  out.content = tpl.render(ctx);
  out.is_protected = is_protected_kind(*kind);
  return out;
}

std::vector<RenderedComponent> render_all(const Blueprint& bp, const StrategyMap& strategies,
                                          const TemplateLibrary& library) {
  std::vector<std::string> reasons;
  for (const auto& e : check_invariants(bp)) reasons.push_back(e.to_string());
  if (reasons.empty()) {
    for (const auto& i : consistency_check(bp).issues) reasons.push_back(i.to_string());
  }
  if (!reasons.empty()) throw BlueprintRejected(std::move(reasons));

  auto need = [&](ComponentKind k) -> const Template& {
    const Template* t = library.find(k, bp.protocol);
    if (!t) {
      throw ProtocolMismatch("no " + std::string(to_string(k)) + " template for " +
                             protocol_scope_name(bp.protocol));
    }
    return *t;
  };
  std::vector<RenderedComponent> out;
  for (auto k : {ComponentKind::kSeqItem, ComponentKind::kDriver, ComponentKind::kMonitor,
                 ComponentKind::kScoreboard, ComponentKind::kSubscriber}) {
    out.push_back(render(need(k), bp, strategies, nullptr, library));
  }
  for (const auto& b : bp.bfms) {
    const Template* t = library.find_bfm(b.kind);
    if (!t) throw BfmPortMismatch("no BFM template for kind " + std::string(to_string(b.kind)));
    out.push_back(render(*t, bp, strategies, &b, library));
  }
  out.push_back(render(need(ComponentKind::kTop), bp, strategies, nullptr, library));
  return out;
}

std::string generate_covergroups(const Blueprint& bp, const StrategyMap& strategies,
                                 const TemplateLibrary& library) {
  const Template* t = library.find(ComponentKind::kSubscriber, bp.protocol);
  if (!t) throw Error("no subscriber template");
  return render(*t, bp, strategies, nullptr, library).content;
}

}  // namespace tbsynth
