#include "tbsynth/coverage.hpp"

#include <cstdio>
#include <sstream>

#include "tbsynth/templates.hpp"
#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<const char*, kMetricCount> kMetricNames = {
    "line", "condition", "toggle", "branch", "fsm_state", "fsm_transition", "group"};

std::optional<int> to_int(const std::string& s) {
  auto v = text::parse_unsigned(s);
  if (!v || *v > 100000000) return std::nullopt;
  return static_cast<int>(*v);
}

bool has_any(const CoverageSummary& s, std::initializer_list<Metric> ms) {
  for (auto m : ms) {
    if (s.get(m)) return true;
  }
  return false;
}

constexpr std::initializer_list<Metric> kCodeMetrics = {Metric::kLine,   Metric::kCondition, Metric::kToggle,
                                                        Metric::kBranch, Metric::kFsmState,  Metric::kFsmTransition};

}  // namespace

std::string_view to_string(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }

std::optional<Metric> metric_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (s == kMetricNames[i]) return static_cast<Metric>(i);
  }
  return std::nullopt;
}

const std::array<Metric, kMetricCount>& all_metrics() {
  static const std::array<Metric, kMetricCount> m = {Metric::kLine,     Metric::kCondition,     Metric::kToggle,
                                                     Metric::kBranch,   Metric::kFsmState,      Metric::kFsmTransition,
                                                     Metric::kGroup};
  return m;
}

Metric gap_metric(const CoverageGap& g) {
  return std::visit(overloaded{
                        [](const LineMiss&) { return Metric::kLine; },
                        [](const ConditionMiss&) { return Metric::kCondition; },
                        [](const ToggleMiss&) { return Metric::kToggle; },
                        [](const BranchMiss&) { return Metric::kBranch; },
                        [](const FsmStateMiss&) { return Metric::kFsmState; },
                        [](const FsmTransitionMiss&) { return Metric::kFsmTransition; },
                        [](const FuncBinMiss&) { return Metric::kGroup; },
                    },
                    g.record);
}

std::string CoverageGap::identity() const {
  return std::visit(overloaded{
                        [](const LineMiss& r) { return "LINE:" + r.file + ":" + std::to_string(r.line); },
                        [](const ConditionMiss& r) {
                          return "COND:" + r.file + ":" + std::to_string(r.line) + ":" + r.term;
                        },
                        [](const ToggleMiss& r) {
                          return "TOGGLE:" + r.signal +
                                 (r.direction == ToggleDirection::kRiseMissed ? ":rise" : ":fall");
                        },
                        [](const BranchMiss& r) {
                          return "BRANCH:" + r.file + ":" + std::to_string(r.line) + ":" + r.branch;
                        },
                        [](const FsmStateMiss& r) { return "FSM_STATE:" + r.fsm + ":" + r.state; },
                        [](const FsmTransitionMiss& r) {
                          return "FSM_TRANSITION:" + r.fsm + ":" + r.from + "->" + r.to;
                        },
                        [](const FuncBinMiss& r) { return "FUNC:" + r.covergroup + "." + r.coverpoint + ":" + r.bin; },
                    },
                    record);
}

std::string CoverageGap::to_line() const {
  std::string out = std::visit(
      overloaded{
          [](const LineMiss& r) { return "GAP LINE " + r.file + " " + std::to_string(r.line); },
          [](const ConditionMiss& r) { return "GAP COND " + r.file + " " + std::to_string(r.line) + " " + r.term; },
          [](const ToggleMiss& r) {
            return "GAP TOGGLE " + r.signal +
                   (r.direction == ToggleDirection::kRiseMissed ? " RISE-MISSED" : " FALL-MISSED");
          },
          [](const BranchMiss& r) { return "GAP BRANCH " + r.file + " " + std::to_string(r.line) + " " + r.branch; },
          [](const FsmStateMiss& r) { return "GAP FSM " + r.fsm + " MISSING-STATE " + r.state; },
          [](const FsmTransitionMiss& r) { return "GAP FSM " + r.fsm + " MISSING-TRANSITION " + r.from + "->" + r.to; },
          [](const FuncBinMiss& r) { return "GAP FUNC " + r.covergroup + "." + r.coverpoint + " MISSING-BIN " + r.bin; },
      },
      record);
  if (!note.empty()) out += " -- " + note;
  return out;
}

std::string CoverageGap::describe() const {
  std::string out = std::visit(
      overloaded{
          [](const LineMiss& r) { return "line " + std::to_string(r.line) + " of " + r.file + " never executed"; },
          [](const ConditionMiss& r) {
            return "condition term " + r.term + " at " + r.file + ":" + std::to_string(r.line) + " not covered";
          },
          [](const ToggleMiss& r) {
            return "signal " + r.signal + (r.direction == ToggleDirection::kRiseMissed ? " never rose" : " never fell");
          },
          [](const BranchMiss& r) {
            return "branch " + r.branch + " at " + r.file + ":" + std::to_string(r.line) + " never taken";
          },
          [](const FsmStateMiss& r) { return "FSM " + r.fsm + " never reached state " + r.state; },
          [](const FsmTransitionMiss& r) {
            return "FSM " + r.fsm + " never took transition " + r.from + " -> " + r.to;
          },
          [](const FuncBinMiss& r) {
            return "functional bin " + r.bin + " of coverpoint " + r.coverpoint + " in " + r.covergroup +
                   " never hit";
          },
      },
      record);
  if (!note.empty()) out += " (" + note + ")";
  return out;
}

double CoverageSummary::percent(Metric m) const {
  const auto& v = get(m);
  if (!v) throw MissingMetric(to_string(m));
  return v->percent();
}

double compute_code_coverage(const CoverageSummary& s) {
  const double fsm = (s.percent(Metric::kFsmState) + s.percent(Metric::kFsmTransition)) / 2.0;
  return (s.percent(Metric::kLine) + s.percent(Metric::kCondition) + s.percent(Metric::kToggle) +
          s.percent(Metric::kBranch) + fsm) /
         5.0;
}

double compute_functional_coverage(const CoverageSummary& s) { return s.percent(Metric::kGroup); }

double CoverageSummary::code_coverage() const { return compute_code_coverage(*this); }
double CoverageSummary::functional_coverage() const { return compute_functional_coverage(*this); }

std::optional<CoverageGap> parse_gap_line(std::string_view raw) {
  std::string line = text::trim(raw);
  CoverageGap g;
  if (auto sep = line.find(" -- "); sep != std::string::npos) {
    g.note = text::trim(line.substr(sep + 4));
    line = text::trim(line.substr(0, sep));
  }
  auto t = text::split_ws(line);
  if (!t.empty() && t[0] == "GAP") t.erase(t.begin());
  if (t.empty()) return std::nullopt;
  const std::string& kind = t[0];
  if (kind == "LINE" && t.size() == 3) {
    auto n = to_int(t[2]);
    if (!n) return std::nullopt;
    g.record = LineMiss{t[1], *n};
  } else if (kind == "COND" && t.size() == 4) {
    auto n = to_int(t[2]);
    if (!n) return std::nullopt;
    g.record = ConditionMiss{t[1], *n, t[3]};
  } else if (kind == "TOGGLE" && t.size() == 3) {
    if (t[2] == "RISE-MISSED") g.record = ToggleMiss{t[1], ToggleDirection::kRiseMissed};
    else if (t[2] == "FALL-MISSED") g.record = ToggleMiss{t[1], ToggleDirection::kFallMissed};
    else return std::nullopt;
  } else if (kind == "BRANCH" && t.size() == 4) {
    auto n = to_int(t[2]);
    if (!n) return std::nullopt;
    g.record = BranchMiss{t[1], *n, t[3]};
  } else if (kind == "FSM" && t.size() == 4 && t[2] == "MISSING-STATE") {
    g.record = FsmStateMiss{t[1], t[3]};
  } else if (kind == "FSM" && t.size() == 4 && t[2] == "MISSING-TRANSITION") {
    const auto arrow = t[3].find("->");
    if (arrow == std::string::npos || arrow == 0 || arrow + 2 >= t[3].size()) return std::nullopt;
    g.record = FsmTransitionMiss{t[1], t[3].substr(0, arrow), t[3].substr(arrow + 2)};
  } else if (kind == "FUNC" && t.size() == 4 && t[2] == "MISSING-BIN") {
    const auto dot = t[1].rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= t[1].size()) return std::nullopt;
    g.record = FuncBinMiss{t[1].substr(0, dot), t[1].substr(dot + 1), t[3]};
  } else {
    return std::nullopt;
  }
  return g;
}

CoverageReport parse_report(std::string_view textv) {
  CoverageReport out;
  std::istringstream in{std::string(textv)};
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = text::trim(line);
    if (!header) {
      if (t.empty()) continue;
      if (t != kReportMagic) throw UnsupportedFormat("coverage report does not start with \"" + std::string(kReportMagic) + "\"");
      header = true;
      continue;
    }
    if (t.empty() || t[0] == '#') continue;
    auto warn = [&] { out.warnings.push_back("line " + std::to_string(lineno) + ": " + t); };
    if (text::starts_with(t, "METRIC ")) {
      const auto parts = text::split_ws(t);
      std::optional<Metric> m;
      std::optional<std::uint64_t> cov, tot;
      if (parts.size() == 4) {
        m = metric_from_string(parts[1]);
        cov = text::parse_unsigned(parts[2]);
        tot = text::parse_unsigned(parts[3]);
      }
      if (!m || !cov || !tot || *cov > *tot) {
        warn();
        continue;
      }
      out.summary.set(*m, {*cov, *tot});
      continue;
    }
    if (auto g = parse_gap_line(t)) {
      out.gaps.push_back(std::move(*g));
    } else {
      warn();
    }
  }
  if (!header) throw UnsupportedFormat("empty coverage report");
  return out;
}

std::string serialize_report(const CoverageSummary& summary, const std::vector<CoverageGap>& gaps) {
  std::string out(kReportMagic);
  out += "\n";
  for (auto m : all_metrics()) {
    if (const auto& v = summary.get(m)) {
      out += "METRIC " + std::string(to_string(m)) + " " + std::to_string(v->covered) + " " +
             std::to_string(v->total) + "\n";
    }
  }
  for (const auto& g : gaps) out += g.to_line() + "\n";
  return out;
}

json to_json(const CoverageSummary& s) {
  json out = json::object();
  for (auto m : all_metrics()) {
    if (const auto& v = s.get(m)) {
      out[std::string(to_string(m))] = {{"covered", v->covered}, {"total", v->total}, {"percent", v->percent()}};
    }
  }
  try {
    out["code_coverage"] = s.code_coverage();
  } catch (const MissingMetric&) {
  }
  try {
    out["functional_coverage"] = s.functional_coverage();
  } catch (const MissingMetric&) {
  }
  return out;
}

// A family absent from both summaries counts as unchanged.
bool converged(const CoverageSummary& prev, const CoverageSummary& curr, double threshold) {
  const double limit = threshold - 1e-9;
  const bool code = has_any(prev, kCodeMetrics) || has_any(curr, kCodeMetrics);
  const bool func = prev.get(Metric::kGroup) || curr.get(Metric::kGroup);
  const double dc = code ? curr.code_coverage() - prev.code_coverage() : 0.0;
  const double df = func ? curr.functional_coverage() - prev.functional_coverage() : 0.0;
  return dc < limit && df < limit;
}

std::string dsl_schema_instructions() {
  return R"({
  "schema_version": "1",
  "sequences": [
    {
      "name": "<identifier, unique>",
      "description": "<what the sequence targets>",
      "steps": [ <step>, ... ]
    }
  ]
}
Step types (integers may be written as numbers or "0x.." strings):
  {"type": "register_write", "addr": A, "value": V}
  {"type": "register_read", "addr": A, "store_as": "<identifier>"}
  {"type": "poll", "addr": A, "mask": M, "expected": E, "max_iters": N, "interval_cycles": C}
  {"type": "randomize_send", "constraints": [{"field": F, "relation": "eq|in_set|in_range", "operand": X}], "repeat": N}
  {"type": "delay", "cycles": N}
  {"type": "memory_write", "bfm": "<instance>", "base_addr": A, "data": [V, ...]}
  {"type": "bfm_action", "bfm": "<instance>", "action": "<action>", "params": {"<param>": V}}
  {"type": "config_sweep", "fields": [{"field": F, "values": [V, ...]}, ...]}
  {"type": "value_sweep", "field": F, "values": [V, ...]}
  {"type": "toggle_pattern", "field": F, "pattern": "walking_one|walking_zero|alternating"}
Only these ten step types exist. There are no branches, loops or inline HDL.
A poll succeeds when (read_value & mask) == expected.
)";
}

namespace {

std::string step_summary(const DslStep& s, const Blueprint& bp) {
  std::string out(to_string(s.type));
  auto reg = [&](std::uint64_t a) {
    const RegisterDecl* r = bp.find_register_at(a);
    return r ? r->name : text::hex(a);
  };
  switch (s.type) {
    case StepType::kRegisterWrite: return out + " " + reg(s.addr) + "=" + text::hex(s.value);
    case StepType::kRegisterRead: return out + " " + reg(s.addr);
    case StepType::kPoll: return out + " " + reg(s.addr) + "&" + text::hex(s.mask) + "==" + text::hex(s.expected);
    case StepType::kRandomizeSend: {
      std::vector<std::string> f;
      for (const auto& c : s.constraints) f.push_back(c.field);
      return out + " x" + std::to_string(s.repeat) + (f.empty() ? "" : " on " + text::join(f, ","));
    }
    case StepType::kDelay: return out + " " + std::to_string(s.cycles);
    case StepType::kMemoryWrite: return out + " " + s.bfm + "[" + std::to_string(s.data.size()) + "]";
    case StepType::kBfmAction: return out + " " + s.bfm + "." + s.action;
    case StepType::kConfigSweep: {
      std::vector<std::string> f;
      for (const auto& x : s.sweep) f.push_back(x.field);
      return out + " " + text::join(f, ",");
    }
    case StepType::kValueSweep: return out + " " + s.field + "[" + std::to_string(s.values.size()) + "]";
    case StepType::kTogglePattern: return out + " " + s.field + " " + std::string(to_string(s.pattern));
  }
  return out;
}

}  // namespace

std::string render_gap_prompt(const std::vector<CoverageGap>& gaps, const std::vector<DslSequence>& existing,
                              const Blueprint& bp, std::string_view protocol_flows) {
  std::ostringstream o;
  o << "Design " << bp.design_name << " (" << protocol_scope_name(bp.protocol) << ").\n"
    << "Write new stimulus sequences that close the coverage gaps below. Answer with one JSON "
       "document in the DSL format at the end and nothing else.\n\n";

  o << "Coverage gaps (" << gaps.size() << "):\n";
  for (const auto& g : gaps) o << "- " << g.describe() << "\n";

  o << "\nExisting sequences (" << existing.size() << "), already simulated; do not repeat them:\n";
  for (const auto& s : existing) {
    std::vector<std::string> steps;
    for (const auto& st : s.steps) steps.push_back(step_summary(st, bp));
    o << "- " << s.name;
    if (!s.description.empty()) o << ": " << s.description;
    o << " [" << text::join(steps, "; ") << "]\n";
  }

  o << "\nRegister map:\n";
  if (bp.registers.empty()) o << "(none)\n";
  for (const auto& r : bp.registers) {
    o << "- " << r.name << " " << text::hex(r.address) << " " << to_string(r.access) << " " << r.width << " bits";
    if (!r.fields.empty()) {
      std::vector<std::string> fs;
      for (const auto& f : r.fields) {
        fs.push_back(f.name + "[" + std::to_string(f.msb) + ":" + std::to_string(f.lsb) + "]");
      }
      o << ", fields " << text::join(fs, " ");
    }
    o << "\n";
  }

  o << "\nTransaction fields:\n";
  for (const auto& f : bp.seq_item_fields) {
    o << "- " << f.name << " " << f.width << " bits " << to_string(f.direction) << " " << to_string(f.role) << "\n";
  }

  if (!bp.bfms.empty()) {
    o << "\nBFM instances:\n";
    for (const auto& b : bp.bfms) {
      o << "- " << b.instance_name << " (" << to_string(b.kind) << ")";
      if (const BfmTemplateInfo* info = TemplateLibrary::builtin().bfm_info(b.kind)) {
        std::vector<std::string> acts;
        for (const auto& a : info->actions) acts.push_back(a.name + "(" + text::join(a.params, ",") + ")");
        o << ": actions " << text::join(acts, " ");
        if (info->has_memory) o << "; memory_write supported";
      }
      o << "\n";
    }
  }

  o << "\nProtocol flows:\n" << (protocol_flows.empty() ? std::string("(none given)") : std::string(protocol_flows));
  if (!protocol_flows.empty() && protocol_flows.back() != '\n') o << "\n";
  o << "\nDSL format:\n" << dsl_schema_instructions();
  return o.str();
}

}  // namespace tbsynth
