#include "tbsynth/simulator.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "tbsynth/protocol_lint.hpp"
#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Structural compile

CompileResult structural_compile(const FileSet& files) {
  static const std::regex include_re(R"(^\s*`include\s+"([^"]+)\")");
  std::set<std::string> names;
  for (const auto& f : files) names.insert(f.name);

  const Blueprint empty;
  std::string log;
  for (const auto& f : files) {
    const RuleReport r = check_protocol_rules(f.content, empty, LintTarget::kOther);
    for (const auto& v : r.violations) {
      if (v.rule != LintRule::kBalancedBlocks) continue;
      log += "Error-[SE] " + f.name + ":" + std::to_string(v.line) + ": " + v.message + "\n";
    }
    std::istringstream in(f.content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::smatch m;
      if (!std::regex_search(line, m, include_re)) continue;
      const std::string inc = m[1].str();
      if (inc == "uvm_macros.svh" || names.count(inc)) continue;
      log += "Error-[SFCOR] " + f.name + ":" + std::to_string(lineno) + ": cannot open include file \"" + inc +
             "\"\n";
    }
  }
  return {log.empty(), log};
}

// ---------------------------------------------------------------------------
// Profile

namespace {

std::uint64_t profile_int(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    if (auto n = text::parse_unsigned(v.get<std::string>())) return *n;
  }
  throw SimulatorError("DUT profile: " + where + " must be a non-negative integer");
}

std::string profile_str(const json& v, const std::string& where) {
  if (!v.is_string()) throw SimulatorError("DUT profile: " + where + " must be a string");
  return v.get<std::string>();
}

StepPattern parse_pattern(const json& w, const std::string& where) {
  if (!w.is_object()) throw SimulatorError("DUT profile: " + where + " must be an object");
  StepPattern p;
  for (auto it = w.begin(); it != w.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    const std::string at = where + "." + k;
    if (k == "type") {
      p.type = step_type_from_string(profile_str(v, at));
      if (!p.type) throw SimulatorError("DUT profile: unknown step type at " + at);
    } else if (k == "addr") {
      p.addr = profile_int(v, at);
    } else if (k == "value") {
      p.value = profile_int(v, at);
    } else if (k == "field") {
      p.field = profile_str(v, at);
    } else if (k == "values") {
      if (!v.is_array()) throw SimulatorError("DUT profile: " + at + " must be a list");
      for (const auto& x : v) p.values.push_back(profile_int(x, at));
    } else if (k == "bfm") {
      p.bfm = profile_str(v, at);
    } else if (k == "action") {
      p.action = profile_str(v, at);
    } else if (k == "pattern") {
      const std::string s = profile_str(v, at);
      if (s == "walking_one") p.pattern = TogglePattern::kWalkingOne;
      else if (s == "walking_zero") p.pattern = TogglePattern::kWalkingZero;
      else if (s == "alternating") p.pattern = TogglePattern::kAlternating;
      else throw SimulatorError("DUT profile: unknown toggle pattern at " + at);
    } else if (k == "min_count") {
      p.min_count = static_cast<int>(profile_int(v, at));
    } else {
      throw SimulatorError("DUT profile: unknown key " + at);
    }
  }
  return p;
}

// Values a step drives, optionally restricted to one field.
std::vector<std::uint64_t> step_values(const DslStep& s, const std::optional<std::string>& field) {
  std::vector<std::uint64_t> out;
  switch (s.type) {
    case StepType::kRegisterWrite: out.push_back(s.value); break;
    case StepType::kMemoryWrite: out = s.data; break;
    case StepType::kValueSweep:
      if (!field || *field == s.field) out = s.values;
      break;
    case StepType::kConfigSweep:
      for (const auto& f : s.sweep) {
        if (!field || *field == f.field) out.insert(out.end(), f.values.begin(), f.values.end());
      }
      break;
    case StepType::kRandomizeSend:
      for (const auto& c : s.constraints) {
        if (field && *field != c.field) continue;
        if (c.relation == Relation::kInRange && c.operand.size() == 2 && c.operand[1] - c.operand[0] < 4096) {
          for (std::uint64_t v = c.operand[0]; v <= c.operand[1]; ++v) out.push_back(v);
        } else if (c.relation != Relation::kInRange) {
          out.insert(out.end(), c.operand.begin(), c.operand.end());
        }
      }
      break;
    default: break;
  }
  return out;
}

bool step_names_field(const DslStep& s, const std::string& field) {
  switch (s.type) {
    case StepType::kValueSweep:
    case StepType::kTogglePattern: return s.field == field;
    case StepType::kConfigSweep:
      for (const auto& f : s.sweep) {
        if (f.field == field) return true;
      }
      return false;
    case StepType::kRandomizeSend:
      for (const auto& c : s.constraints) {
        if (c.field == field) return true;
      }
      return false;
    default: return false;
  }
}

std::uint64_t step_weight(const DslStep& s) { return s.type == StepType::kRandomizeSend ? s.repeat : 1; }

}  // namespace

bool StepPattern::matches(const DslStep& s) const {
  if (type && s.type != *type) return false;
  if (addr) {
    switch (s.type) {
      case StepType::kRegisterWrite:
      case StepType::kRegisterRead:
      case StepType::kPoll:
        if (s.addr != *addr) return false;
        break;
      case StepType::kMemoryWrite:
        if (s.base_addr != *addr) return false;
        break;
      default: return false;
    }
  }
  if (field && !step_names_field(s, *field)) return false;
  if (bfm && s.bfm != *bfm) return false;
  if (action && s.action != *action) return false;
  if (pattern && (s.type != StepType::kTogglePattern || s.pattern != *pattern)) return false;
  if (value || !values.empty()) {
    const auto have = step_values(s, field);
    const std::set<std::uint64_t> set(have.begin(), have.end());
    if (value && !set.count(*value)) return false;
    for (auto v : values) {
      if (!set.count(v)) return false;
    }
  }
  return true;
}

DutProfile parse_dut_profile(const json& doc) {
  if (!doc.is_object()) throw SimulatorError("DUT profile must be a JSON object");
  DutProfile p;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "metrics") {
      if (!v.is_object()) throw SimulatorError("DUT profile: metrics must be an object");
      for (auto m = v.begin(); m != v.end(); ++m) {
        auto metric = metric_from_string(m.key());
        if (!metric) throw SimulatorError("DUT profile: unknown metric " + m.key());
        const json& mv = m.value();
        if (!mv.is_object() || !mv.contains("covered") || !mv.contains("total")) {
          throw SimulatorError("DUT profile: metric " + m.key() + " needs covered and total");
        }
        p.base.set(*metric, {profile_int(mv["covered"], m.key() + ".covered"),
                             profile_int(mv["total"], m.key() + ".total")});
      }
    } else if (k == "items") {
      if (!v.is_array()) throw SimulatorError("DUT profile: items must be a list");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string where = "items[" + std::to_string(i) + "]";
        const json& item = v[i];
        if (!item.is_object() || !item.contains("gap")) throw SimulatorError("DUT profile: " + where + " needs gap");
        ProfileItem pi;
        auto g = parse_gap_line(profile_str(item["gap"], where + ".gap"));
        if (!g) throw SimulatorError("DUT profile: " + where + ".gap is not a gap line");
        pi.gap = std::move(*g);
        if (item.contains("when")) {
          const json& w = item["when"];
          if (w.is_array()) {
            for (std::size_t j = 0; j < w.size(); ++j) {
              pi.when.push_back(parse_pattern(w[j], where + ".when[" + std::to_string(j) + "]"));
            }
          } else {
            pi.when.push_back(parse_pattern(w, where + ".when"));
          }
        }
        for (auto x = item.begin(); x != item.end(); ++x) {
          if (x.key() != "gap" && x.key() != "when") throw SimulatorError("DUT profile: unknown key " + where + "." + x.key());
        }
        p.items.push_back(std::move(pi));
      }
    } else if (k == "compile") {
      if (!v.is_object()) throw SimulatorError("DUT profile: compile must be an object");
      for (auto c = v.begin(); c != v.end(); ++c) {
        if (c.key() == "fail_first") p.compile.fail_first = static_cast<int>(profile_int(c.value(), "compile.fail_first"));
        else if (c.key() == "always_fail") {
          if (!c.value().is_boolean()) throw SimulatorError("DUT profile: compile.always_fail must be a boolean");
          p.compile.always_fail = c.value().get<bool>();
        } else if (c.key() == "file") p.compile.file = profile_str(c.value(), "compile.file");
        else if (c.key() == "message") p.compile.message = profile_str(c.value(), "compile.message");
        else throw SimulatorError("DUT profile: unknown key compile." + c.key());
      }
    } else {
      throw SimulatorError("DUT profile: unknown key " + k);
    }
  }

  std::array<std::uint64_t, kMetricCount> per_metric{};
  for (const auto& item : p.items) ++per_metric[static_cast<std::size_t>(gap_metric(item.gap))];
  for (auto m : all_metrics()) {
    const auto n = per_metric[static_cast<std::size_t>(m)];
    const auto& base = p.base.get(m);
    if (n > 0 && !base) {
      throw SimulatorError("DUT profile: items reference metric " + std::string(to_string(m)) + " with no counts");
    }
    if (base && base->covered + n > base->total) {
      throw SimulatorError("DUT profile: metric " + std::string(to_string(m)) + " has more items than uncovered room");
    }
  }
  return p;
}

DutProfile load_dut_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimulatorError("cannot read DUT profile " + path.string());
  try {
    return parse_dut_profile(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SimulatorError("DUT profile " + path.string() + " is not JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// MockSimulator

MockSimulator::MockSimulator(DutProfile profile) : profile_(std::move(profile)) {}

CompileResult MockSimulator::compile(const FileSet& files) {
  ++compile_calls_;
  const auto& f = profile_.compile;
  if (f.always_fail || compile_calls_ <= f.fail_first) {
    const std::string file = f.file.empty() ? (files.empty() ? std::string("top.sv") : files.front().name) : f.file;
    return {false, "Error-[SE] " + file + ":1: " + f.message + "\n"};
  }
  return structural_compile(files);
}

std::string MockSimulator::simulate(const FileSet&, const std::vector<DslSequence>& sequences) {
  ++simulate_calls_;
  CoverageSummary summary = profile_.base;
  std::vector<CoverageGap> gaps;
  for (const auto& item : profile_.items) {
    bool hit = false;
    for (const auto& pat : item.when) {
      std::uint64_t count = 0;
      for (const auto& seq : sequences) {
        for (const auto& step : seq.steps) {
          if (pat.matches(step)) count += step_weight(step);
        }
      }
      if (count >= static_cast<std::uint64_t>(std::max(pat.min_count, 1))) {
        hit = true;
        break;
      }
    }
    if (hit) {
      const Metric m = gap_metric(item.gap);
      MetricValue v = *summary.get(m);
      ++v.covered;
      summary.set(m, v);
    } else {
      gaps.push_back(item.gap);
    }
  }
  return serialize_report(summary, gaps);
}

// ---------------------------------------------------------------------------
// ScriptedSimulator

CompileResult ScriptedSimulator::compile(const FileSet&) {
  ++compile_calls_;
  if (compiles_.empty()) return {true, ""};
  CompileResult r = std::move(compiles_.front());
  compiles_.pop_front();
  return r;
}

std::string ScriptedSimulator::simulate(const FileSet&, const std::vector<DslSequence>&) {
  ++simulate_calls_;
  if (!reports_.empty()) {
    last_report_ = std::move(reports_.front());
    reports_.pop_front();
  }
  if (last_report_.empty()) throw SimulatorError("scripted simulator has no report");
  return last_report_;
}

// ---------------------------------------------------------------------------
// ExternalSimulator

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

struct CommandResult {
  int status = -1;
  std::string output;
};

CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw SimulatorError("cannot run: " + cmd);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int st = ::pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

}  // namespace

ExternalSimulator::ExternalSimulator(std::string command, std::filesystem::path work_dir)
    : command_(std::move(command)), work_dir_(std::move(work_dir)) {}

void ExternalSimulator::write_files(const FileSet& files) const {
  std::filesystem::create_directories(work_dir_);
  for (const auto& f : files) {
    std::ofstream out(work_dir_ / f.name, std::ios::binary | std::ios::trunc);
    if (!out) throw SimulatorError("cannot write " + (work_dir_ / f.name).string());
    out << f.content;
  }
}

CompileResult ExternalSimulator::compile(const FileSet& files) {
  write_files(files);
  const auto r = run_command(command_ + " compile " + shell_quote(work_dir_.string()) + " 2>&1");
  return {r.status == 0, r.status == 0 ? std::string() : r.output};
}

std::string ExternalSimulator::simulate(const FileSet& files, const std::vector<DslSequence>&) {
  write_files(files);
  const auto r = run_command(command_ + " simulate " + shell_quote(work_dir_.string()));
  if (r.status != 0) throw SimulatorError("simulation command exited with status " + std::to_string(r.status));
  return r.output;
}

}  // namespace tbsynth
