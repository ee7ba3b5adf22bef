#include "tbsynth/predefined_seqs.hpp"
#include "tbsynth/templates.hpp"

#include <algorithm>
#include <set>

#include "bus_view.hpp"
#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

std::string_view to_string(PredefinedKind k) {
  switch (k) {
    case PredefinedKind::kCrv: return "crv";
    case PredefinedKind::kEnum: return "enum";
    case PredefinedKind::kToggle: return "toggle";
    case PredefinedKind::kFifo: return "fifo";
    case PredefinedKind::kBank: return "bank";
    case PredefinedKind::kBfm: return "bfm";
  }
  return "?";
}

const std::vector<PredefinedKind>& all_predefined_kinds() {
  static const std::vector<PredefinedKind> k = {PredefinedKind::kCrv,  PredefinedKind::kEnum,
                                                PredefinedKind::kToggle, PredefinedKind::kFifo,
                                                PredefinedKind::kBank, PredefinedKind::kBfm};
  return k;
}

json to_json(const TriggerReport& r) {
  json out = json::object();
  for (const auto& [k, v] : r.kinds) out[std::string(to_string(k))] = {{"fired", v.fired}, {"evidence", v.evidence}};
  return out;
}

namespace {

bool has_token(std::string_view name, const std::vector<std::string>& wanted) {
  for (const auto& t : text::name_tokens(name)) {
    if (std::find(wanted.begin(), wanted.end(), t) != wanted.end()) return true;
  }
  return false;
}

bool is_number(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

DslStep write_step(std::uint64_t addr, std::uint64_t value) {
  DslStep s;
  s.type = StepType::kRegisterWrite;
  s.addr = addr;
  s.value = value;
  return s;
}

DslStep read_step(std::uint64_t addr) {
  DslStep s;
  s.type = StepType::kRegisterRead;
  s.addr = addr;
  return s;
}

// Deterministic data pattern for write-based sequences.
std::uint64_t pattern_value(std::uint64_t seed, int width) {
  return (0xA5A5A5A5A5A5A5A5ULL ^ (seed * 0x0101010101010101ULL)) & text::width_mask(width);
}

struct Fifo {
  std::vector<std::string> evidence;
  std::vector<const RegisterDecl*> push;  // writable matches
  std::vector<const RegisterDecl*> pop;   // readable matches
};

Fifo find_fifo(const Blueprint& bp, const PredefinedOptions& o) {
  Fifo f;
  for (const auto& r : bp.registers) {
    bool hit = has_token(r.name, o.fifo_tokens);
    if (hit) f.evidence.push_back(r.name);
    for (const auto& rf : r.fields) {
      if (has_token(rf.name, o.fifo_tokens)) {
        f.evidence.push_back(r.name + "." + rf.name);
        hit = true;
      }
    }
    if (!hit) continue;
    if (r.writable()) f.push.push_back(&r);
    if (r.readable()) f.pop.push_back(&r);
  }
  return f;
}

const RegisterDecl* status_register(const Blueprint& bp) {
  static const std::vector<std::string> tokens = {"status", "stat", "sr", "flags", "isr"};
  for (const auto& r : bp.registers) {
    if (r.readable() && has_token(r.name, tokens)) return &r;
  }
  return nullptr;
}

bool toggle_predicate(const Blueprint& bp, std::vector<std::string>* evidence) {
  bool fired = false;
  if (bp.protocol.is_bus()) {
    fired = true;
    if (evidence) evidence->push_back("bus:" + protocol_scope_name(bp.protocol));
  }
  if (!bp.registers.empty()) {
    fired = true;
    if (evidence) evidence->push_back("registers:" + std::to_string(bp.registers.size()));
  }
  return fired;
}

class Builder {
 public:
  Builder(const Blueprint& bp, const StrategyMap& strategies, const PredefinedOptions& o)
      : bp_(bp), strategies_(strategies), o_(o), bus_(detail::make_bus_view(bp)) {}

  PredefinedResult run() {
    out_.report = evaluate_triggers(bp_, strategies_, o_);
    crv();
    if (out_.report.fired(PredefinedKind::kEnum)) enumerate();
    if (out_.report.fired(PredefinedKind::kToggle)) toggle();
    if (out_.report.fired(PredefinedKind::kFifo)) fifo();
    if (out_.report.fired(PredefinedKind::kBank)) bank();
    if (out_.report.fired(PredefinedKind::kBfm)) bfm();
    return std::move(out_);
  }

 private:
  // Keeps only steps that check clean against the Blueprint.
  void emit(std::string name, std::string description, std::vector<DslStep> steps) {
    DslSequence s{std::move(name), std::move(description), {}};
    for (auto& st : steps) {
      if (check_step(st, bp_).empty()) s.steps.push_back(std::move(st));
    }
    if (!s.steps.empty()) out_.sequences.push_back(std::move(s));
  }

  DslStep random_step(std::vector<Constraint> cs, std::uint64_t repeat) {
    DslStep s;
    s.type = StepType::kRandomizeSend;
    s.constraints = std::move(cs);
    s.repeat = repeat;
    return s;
  }

  std::vector<std::uint64_t> addrs(bool writable) const {
    std::vector<std::uint64_t> a;
    for (const auto& r : bp_.registers) {
      if (writable ? r.writable() : r.readable()) a.push_back(r.address);
    }
    return a;
  }

  void crv() {
    const auto n = static_cast<std::uint64_t>(o_.crv_repeat);
    std::vector<Constraint> wr, rd;
    if (bus_.is_bus) {
      wr.push_back({"op", Relation::kEq, {1}});
      rd.push_back({"op", Relation::kEq, {2}});
      if (auto a = addrs(true); !a.empty()) wr.push_back({bus_.write_addr, Relation::kInSet, a});
      if (auto a = addrs(false); !a.empty()) rd.push_back({bus_.read_addr, Relation::kInSet, a});
    }
    emit("crv_random_writes", "Constrained-random write transactions", {random_step(wr, n)});
    emit("crv_random_reads", "Constrained-random read transactions", {random_step(rd, n)});
    emit("crv_mixed", "Constrained-random mixed traffic", {random_step({}, 2 * n)});
  }

  void enumerate() {
    for (const auto& name : out_.report.at(PredefinedKind::kEnum).evidence) {
      DslStep s;
      s.type = StepType::kValueSweep;
      s.field = name;
      s.values = strategies_.at(name).values;
      emit("enum_" + name, "Sweep every value of " + name, {s});
    }
  }

  std::vector<std::string> toggle_targets() const {
    std::vector<std::string> t;
    auto ok = [&](const std::string& name) {
      DslStep s;
      s.type = StepType::kTogglePattern;
      s.field = name;
      return check_step(s, bp_).empty();
    };
    for (const auto& f : bp_.seq_item_fields) {
      if (f.role == FieldRole::kData && f.direction == FieldDirection::kToDut && ok(f.name)) t.push_back(f.name);
    }
    if (t.empty()) {
      for (const auto& r : bp_.registers) {
        if (r.writable() && ok(r.name)) t.push_back(r.name);
      }
    }
    return t;
  }

  void toggle() {
    for (const auto& name : toggle_targets()) {
      std::vector<DslStep> steps;
      for (auto p : {TogglePattern::kWalkingOne, TogglePattern::kWalkingZero, TogglePattern::kAlternating}) {
        DslStep s;
        s.type = StepType::kTogglePattern;
        s.field = name;
        s.pattern = p;
        steps.push_back(s);
      }
      emit("toggle_" + name, "Walking-1, walking-0 and alternating patterns on " + name, steps);
    }
  }

  void fifo() {
    const Fifo f = find_fifo(bp_, o_);
    const auto depth = static_cast<std::uint64_t>(o_.fifo_depth);
    const RegisterDecl* status = status_register(bp_);
    auto settle = [&](std::vector<DslStep>& steps) {
      if (!status) return;
      DslStep p;
      p.type = StepType::kPoll;
      p.addr = status->address;
      p.mask = 0;
      p.expected = 0;
      p.max_iters = depth;
      steps.push_back(p);
    };
    if (!f.push.empty()) {
      const RegisterDecl& r = *f.push.front();
      std::vector<DslStep> fill;
      for (std::uint64_t i = 0; i < depth; ++i) fill.push_back(write_step(r.address, pattern_value(i, r.width)));
      settle(fill);
      emit("fifo_fill", "Write " + std::to_string(depth) + " entries through " + r.name, fill);

      std::vector<DslStep> over;
      for (std::uint64_t i = 0; i < depth + depth / 4 + 1; ++i) {
        over.push_back(write_step(r.address, pattern_value(i, r.width)));
      }
      settle(over);
      if (status) over.push_back(read_step(status->address));
      emit("fifo_overflow", "Write past the FIFO depth through " + r.name, over);
    }
    if (!f.pop.empty()) {
      const RegisterDecl& r = *f.pop.front();
      std::vector<DslStep> drain;
      for (std::uint64_t i = 0; i < depth; ++i) drain.push_back(read_step(r.address));
      emit("fifo_drain", "Read " + std::to_string(depth) + " entries from " + r.name, drain);
    }
    if (!f.push.empty() && !f.pop.empty()) {
      const RegisterDecl& w = *f.push.front();
      const RegisterDecl& r = *f.pop.back();
      std::vector<DslStep> pp;
      for (std::uint64_t i = 0; i < depth; ++i) {
        pp.push_back(write_step(w.address, pattern_value(i, w.width)));
        pp.push_back(read_step(r.address));
      }
      emit("fifo_push_pop", "Interleaved push and pop on " + w.name + " and " + r.name, pp);
    }
  }

  void bank() {
    const auto layout = detect_banks(bp_);
    if (!layout) return;
    std::vector<DslStep> seq;
    for (std::size_t b = 0; b < layout->banks.size(); ++b) {
      for (const RegisterDecl* r : layout->banks[b]) {
        if (r->writable()) seq.push_back(write_step(r->address, pattern_value(b + 1, r->width)));
      }
    }
    emit("bank_sequential", "Write each bank in turn", seq);
    std::vector<DslStep> inter;
    const std::size_t per_bank = layout->banks.front().size();
    for (std::size_t i = 0; i < per_bank; ++i) {
      for (std::size_t b = 0; b < layout->banks.size(); ++b) {
        const RegisterDecl* r = layout->banks[b][i];
        if (r->writable()) inter.push_back(write_step(r->address, pattern_value(b + 1, r->width)));
      }
    }
    emit("bank_interleaved", "Interleave writes across banks", inter);
  }

  void bfm() {
    for (const auto& b : bp_.bfms) {
      const BfmTemplateInfo* info = TemplateLibrary::builtin().bfm_info(b.kind);
      if (!info) continue;
      std::vector<DslStep> steps;
      for (const auto& sm : info->smoke) {
        DslStep s;
        s.type = StepType::kBfmAction;
        s.bfm = b.instance_name;
        s.action = sm.action;
        s.params = sm.params;
        steps.push_back(s);
      }
      emit("bfm_" + b.instance_name + "_smoke",
           "Protocol actions for " + b.instance_name + " (" + std::string(to_string(b.kind)) + ")", steps);
    }
  }

  const Blueprint& bp_;
  const StrategyMap& strategies_;
  const PredefinedOptions& o_;
  detail::BusView bus_;
  PredefinedResult out_;
};

}  // namespace

std::optional<BankLayout> detect_banks(const Blueprint& bp) {
  // template (name with the index token replaced) -> index -> register
  std::map<std::string, std::map<int, const RegisterDecl*>> by_template;
  for (const auto& r : bp.registers) {
    const auto tokens = text::name_tokens(r.name);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!is_number(tokens[i]) || tokens[i].size() > 4) continue;
      std::vector<std::string> t = tokens;
      t[i] = "#";
      by_template[text::join(t, "_")][std::stoi(tokens[i])] = &r;
      break;
    }
  }
  std::map<int, std::vector<const RegisterDecl*>> banks;
  std::set<std::string> templates;
  for (const auto& [tpl, regs] : by_template) {
    if (regs.size() < 2) continue;
    templates.insert(tpl);
    for (const auto& [idx, r] : regs) banks[idx].push_back(r);
  }
  if (banks.size() < 2) return std::nullopt;
  BankLayout out;
  for (auto& [idx, regs] : banks) {
    if (regs.size() != templates.size()) return std::nullopt;  // every bank has every register
    std::sort(regs.begin(), regs.end(), [](auto* a, auto* b) { return a->address < b->address; });
    out.indices.push_back(idx);
    out.banks.push_back(regs);
  }
  const auto base = [](const std::vector<const RegisterDecl*>& regs) { return regs.front()->address; };
  if (base(out.banks[1]) <= base(out.banks[0])) return std::nullopt;
  out.stride = base(out.banks[1]) - base(out.banks[0]);
  for (std::size_t b = 0; b < out.banks.size(); ++b) {
    if (base(out.banks[b]) != base(out.banks[0]) + b * out.stride) return std::nullopt;
    for (std::size_t i = 0; i < out.banks[b].size(); ++i) {
      const auto off0 = out.banks[0][i]->address - base(out.banks[0]);
      if (out.banks[b][i]->address - base(out.banks[b]) != off0) return std::nullopt;
      if (text::name_tokens(out.banks[b][i]->name).size() != text::name_tokens(out.banks[0][i]->name).size()) {
        return std::nullopt;
      }
    }
  }
  return out;
}

TriggerReport evaluate_triggers(const Blueprint& bp, const StrategyMap& strategies, const PredefinedOptions& o) {
  TriggerReport r;
  r.kinds[PredefinedKind::kCrv] = {true, {"always"}};

  TriggerResult en;
  const detail::BusView bus = detail::make_bus_view(bp);
  for (const auto& f : bp.seq_item_fields) {
    auto it = strategies.find(f.name);
    if (it == strategies.end() || it->second.kind != StrategyKind::kEnumerate) continue;
    DslStep probe;
    probe.type = StepType::kValueSweep;
    probe.field = f.name;
    probe.values = it->second.values;
    if (check_step(probe, bp).empty()) en.evidence.push_back(f.name);
  }
  en.fired = !en.evidence.empty();
  r.kinds[PredefinedKind::kEnum] = en;

  TriggerResult tg;
  tg.fired = toggle_predicate(bp, &tg.evidence);
  r.kinds[PredefinedKind::kToggle] = tg;

  TriggerResult ff;
  ff.evidence = find_fifo(bp, o).evidence;
  ff.fired = !ff.evidence.empty();
  r.kinds[PredefinedKind::kFifo] = ff;

  TriggerResult bk;
  if (auto layout = detect_banks(bp)) {
    bk.fired = true;
    bk.evidence.push_back("stride:" + text::hex(layout->stride));
    for (const auto& bank : layout->banks) {
      for (const RegisterDecl* reg : bank) bk.evidence.push_back(reg->name);
    }
  }
  r.kinds[PredefinedKind::kBank] = bk;

  TriggerResult bf;
  for (const auto& b : bp.bfms) bf.evidence.push_back(b.instance_name);
  bf.fired = !bf.evidence.empty();
  r.kinds[PredefinedKind::kBfm] = bf;
  return r;
}

PredefinedResult infer_predefined(const Blueprint& bp, const StrategyMap& strategies, const PredefinedOptions& o) {
  return Builder(bp, strategies, o).run();
}

}  // namespace tbsynth
