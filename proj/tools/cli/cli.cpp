#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"
#include "tbsynth/coverage.hpp"
#include "tbsynth/llm_client.hpp"
#include "tbsynth/orchestrator.hpp"
#include "tbsynth/protocol_lint.hpp"
#include "tbsynth/seq_dsl.hpp"
#include "tbsynth/simulator.hpp"
#include "tbsynth/strategy.hpp"
#include "tbsynth/templates.hpp"

namespace tbsynth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + p.string());
  out << content;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

Blueprint load_blueprint(const fs::path& p) {
  auto r = parse_blueprint(read_file(p));
  if (!r.ok()) {
    std::vector<std::string> reasons;
    for (const auto& e : r.errors) reasons.push_back(e.to_string());
    throw BlueprintRejected(reasons);
  }
  return std::move(*r.blueprint);
}

LintTarget lint_target(ComponentKind k) {
  switch (k) {
    case ComponentKind::kDriver: return LintTarget::kDriver;
    case ComponentKind::kMonitor: return LintTarget::kMonitor;
    case ComponentKind::kBfm: return LintTarget::kBfm;
    case ComponentKind::kSequencePkg: return LintTarget::kSequence;
    default: return LintTarget::kOther;
  }
}

struct Backends {
  std::unique_ptr<LlmClient> llm;
  std::unique_ptr<SimulatorBackend> sim;
};

std::unique_ptr<LlmClient> make_llm(const Settings& s) {
  if (s.llm.rfind("scripted:", 0) == 0) return std::make_unique<ScriptedLlmClient>(s.llm.substr(9));
  if (s.llm == "http") {
    HttpLlmConfig c;
    c.endpoint = s.llm_endpoint;
    c.model = s.llm_model;
    c.api_key_env = s.llm_api_key_env;
    c.timeout_seconds = s.llm_timeout;
    return std::make_unique<HttpLlmClient>(c);
  }
  if (s.llm.empty()) throw ConfigError("no LLM backend; pass --llm scripted:<dir> or --llm http");
  throw ConfigError("unknown LLM backend \"" + s.llm + "\"");
}

std::unique_ptr<SimulatorBackend> make_sim(const Settings& s) {
  if (s.sim.rfind("mock:", 0) == 0) return std::make_unique<MockSimulator>(load_dut_profile(s.sim.substr(5)));
  if (s.sim.rfind("external:", 0) == 0) {
    return std::make_unique<ExternalSimulator>(s.sim.substr(9), fs::path(s.out) / "sim_work");
  }
  if (s.sim.empty()) throw ConfigError("no simulator backend; pass --sim mock:<profile> or --sim external:<cmd>");
  throw ConfigError("unknown simulator backend \"" + s.sim + "\"");
}

// ---------------------------------------------------------------------------

struct Common {
  bool json = false;
  std::optional<std::string> config;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  const EnvLookup& env;
  Common common;
};

Settings settings_for(const Context& ctx, const std::map<std::string, std::string>& flags) {
  std::optional<std::string> text;
  if (ctx.common.config) {
    text = read_file(*ctx.common.config);
  } else if (auto p = ctx.env("HAVEN_CONFIG"); p && !p->empty()) {
    text = read_file(*p);
  }
  return resolve_settings(text, ctx.env, flags);
}

// blueprint ------------------------------------------------------------------

struct BlueprintArgs {
  std::string input;
  std::optional<std::string> out;
  std::optional<std::string> llm;
};

int cmd_blueprint(Context& ctx, const BlueprintArgs& a) {
  const std::string text = read_file(a.input);
  const auto first = text.find_first_not_of(" \t\r\n");
  std::string bp_text;
  bool extracted = false;
  if (first != std::string::npos && text[first] == '{') {
    bp_text = text;
  } else {
    std::map<std::string, std::string> flags;
    if (a.llm) flags["llm.backend"] = *a.llm;
    const Settings s = settings_for(ctx, flags);
    auto llm = make_llm(s);
    bp_text = llm->extract_blueprint(text);
    extracted = true;
  }

  json report = {{"input", a.input}, {"extracted", extracted}};
  auto parsed = parse_blueprint(bp_text);
  std::vector<std::string> errors;
  for (const auto& e : parsed.errors) errors.push_back(e.to_string());
  std::vector<std::string> issues;
  if (parsed.ok()) {
    for (const auto& i : consistency_check(*parsed.blueprint).issues) issues.push_back(i.to_string());
  }
  const bool ok = parsed.ok() && issues.empty();
  report["valid"] = ok;
  report["errors"] = errors;
  report["consistency"] = issues;
  if (ok) {
    const Blueprint& bp = *parsed.blueprint;
    report["design"] = bp.design_name;
    report["protocol"] = protocol_scope_name(bp.protocol);
    report["ports"] = bp.ports.size();
    report["seq_item_fields"] = bp.seq_item_fields.size();
    report["registers"] = bp.registers.size();
    report["bfms"] = bp.bfms.size();
    if (a.out) {
      write_file(*a.out, serialize_blueprint(bp));
      report["output"] = *a.out;
    }
  }

  if (ctx.common.json) {
    ctx.out << report.dump(2) << "\n";
  } else {
    for (const auto& e : errors) ctx.out << "error: " << e << "\n";
    for (const auto& i : issues) ctx.out << "consistency: " << i << "\n";
    if (ok) {
      const Blueprint& bp = *parsed.blueprint;
      ctx.out << "Blueprint " << bp.design_name << " (" << protocol_scope_name(bp.protocol) << "): "
              << bp.ports.size() << " ports, " << bp.seq_item_fields.size() << " seq_item fields, "
              << bp.registers.size() << " registers, " << bp.bfms.size() << " BFMs\n"
              << "consistency check passed\n";
      if (a.out) ctx.out << "wrote " << *a.out << "\n";
    }
  }
  return ok ? kExitOk : kExitInputError;
}

// render ---------------------------------------------------------------------

struct RenderArgs {
  std::string blueprint;
  std::optional<std::string> out;
};

int cmd_render(Context& ctx, const RenderArgs& a) {
  const Blueprint bp = load_blueprint(a.blueprint);
  const StrategyMap strategies = infer_all(bp);
  const auto components = render_all(bp, strategies);

  json files = json::array();
  std::size_t total_violations = 0;
  for (const auto& c : components) {
    const RuleReport lint = check_protocol_rules(c.content, bp, lint_target(c.kind));
    total_violations += lint.violations.size();
    json v = json::array();
    for (const auto& x : lint.violations) v.push_back(x.to_string());
    files.push_back({{"file", c.file_name},
                     {"kind", to_string(c.kind)},
                     {"protected", c.is_protected},
                     {"lines", std::count(c.content.begin(), c.content.end(), '\n')},
                     {"violations", v}});
    if (a.out) write_file(fs::path(*a.out) / c.file_name, c.content);
  }

  if (ctx.common.json) {
    json r = {{"design", bp.design_name}, {"files", files}, {"violations", total_violations}};
    if (a.out) r["output"] = *a.out;
    ctx.out << r.dump(2) << "\n";
  } else {
    for (const auto& f : files) {
      ctx.out << std::left << std::setw(36) << f["file"].get<std::string>() << std::setw(11)
              << f["kind"].get<std::string>() << (f["protected"].get<bool>() ? "protected" : "editable ")
              << "  lint " << (f["violations"].empty() ? "ok" : std::to_string(f["violations"].size()) + " violations")
              << "\n";
      for (const auto& v : f["violations"]) ctx.out << "  " << v.get<std::string>() << "\n";
    }
    ctx.out << components.size() << " files, " << total_violations << " lint violations\n";
    if (a.out) ctx.out << "wrote " << *a.out << "\n";
  }
  return total_violations == 0 ? kExitOk : kExitInputError;
}

// dsl ------------------------------------------------------------------------

struct DslArgs {
  std::string input;
  std::string blueprint;
  bool check = false;
  std::optional<std::string> out;
  int iteration = 1;
};

int cmd_dsl(Context& ctx, const DslArgs& a) {
  const Blueprint bp = load_blueprint(a.blueprint);
  const std::string text = read_file(a.input);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("DSL document is not valid JSON: ") + e.what());
  }

  const AutoFixResult fixed = auto_fix(doc, bp);
  json fixes = json::array();
  for (const auto& f : fixed.log) {
    fixes.push_back({{"sequence", f.sequence}, {"step", f.step}, {"rule", to_string(f.rule)}, {"before", f.before},
                     {"after", f.after}});
  }

  const DecodedDocument decoded = decode_document(fixed.document);
  json errors = json::array();
  for (const auto& e : decoded.errors) errors.push_back(e.to_string());

  json filters = json::array();
  std::vector<DslSequence> accepted;
  for (const auto& seq : decoded.sequences) {
    const FilterResult fr = apply_safety_filters(seq, bp);
    for (const auto& f : fr.log) {
      filters.push_back({{"sequence", seq.name}, {"step", f.step}, {"action", f.action}, {"reason", f.reason}});
    }
    if (fr.rejected || !fr.sequence) {
      errors.push_back("sequence " + seq.name + " rejected: every step failed the safety filters");
      continue;
    }
    accepted.push_back(*fr.sequence);
  }

  const bool ok = errors.empty() && !accepted.empty();
  std::string sv;
  if (ok && !a.check) {
    sv = generate_sequence_package(accepted, bp, a.iteration);
    if (a.out) write_file(*a.out, sv);
  }

  if (ctx.common.json) {
    json names = json::array();
    for (const auto& s : accepted) names.push_back(s.name);
    json r = {{"valid", ok}, {"fixes", fixes}, {"filters", filters}, {"errors", errors}, {"sequences", names}};
    if (ok && !a.check) {
      if (a.out) r["output"] = *a.out;
      else r["sv"] = sv;
    }
    ctx.out << r.dump(2) << "\n";
  } else {
    for (const auto& f : fixes) {
      ctx.out << "fix: sequence " << f["sequence"] << " step " << f["step"] << " " << f["rule"].get<std::string>()
              << ": " << f["before"].get<std::string>() << " -> " << f["after"].get<std::string>() << "\n";
    }
    for (const auto& f : filters) {
      ctx.out << "filter: " << f["sequence"].get<std::string>() << " step " << f["step"] << " "
              << f["action"].get<std::string>() << ": " << f["reason"].get<std::string>() << "\n";
    }
    for (const auto& e : errors) ctx.out << "error: " << e.get<std::string>() << "\n";
    if (ok) {
      ctx.out << accepted.size() << " sequence(s) valid\n";
      if (!a.check) {
        if (a.out) ctx.out << "wrote " << *a.out << "\n";
        else ctx.out << sv;
      }
    }
  }
  return ok ? kExitOk : kExitInputError;
}

// run ------------------------------------------------------------------------

struct RunArgs {
  std::optional<std::string> spec;
  std::optional<std::string> blueprint;
  std::map<std::string, std::string> flags;
};

int cmd_run(Context& ctx, const RunArgs& a) {
  if (!a.spec && !a.blueprint) throw InputError("run needs a specification file or --blueprint");
  const Settings s = settings_for(ctx, a.flags);
  auto llm = make_llm(s);
  auto sim = make_sim(s);
  const std::string spec_text = a.spec ? read_file(*a.spec) : std::string();
  std::optional<Blueprint> bp;
  if (a.blueprint) bp = load_blueprint(*a.blueprint);

  Orchestrator orch(to_run_config(s), *llm, *sim);
  PipelineState state = bp ? orch.run_stage1(*bp) : orch.run_stage1(spec_text);
  orch.run_stage2(state);

  const CoverageSummary& first = state.history.front();
  const CoverageSummary& last = state.history.back();
  const TokenUsage usage = llm->ledger().total();
  if (ctx.common.json) {
    json r = {{"design", state.blueprint.design_name},
              {"out", s.out},
              {"components", state.components.size()},
              {"predefined_sequences", state.predefined_count},
              {"sequences", state.sequences.size()},
              {"iterations", state.iteration},
              {"fix_iterations", state.fix_iterations},
              {"stage1", to_json(first)},
              {"final", to_json(last)},
              {"llm_calls", usage.calls},
              {"input_tokens", usage.input_tokens},
              {"output_tokens", usage.output_tokens}};
    ctx.out << r.dump(2) << "\n";
  } else {
    auto pct = [](const CoverageSummary& c, bool code) {
      try {
        return fixed2(code ? c.code_coverage() : c.functional_coverage());
      } catch (const MissingMetric&) {
        return std::string("n/a");
      }
    };
    ctx.out << "design " << state.blueprint.design_name << ": " << state.components.size() << " files, "
            << state.predefined_count << " predefined sequences, " << state.sequences.size() - state.predefined_count
            << " generated sequences\n"
            << "Stage 1 code " << pct(first, true) << " functional " << pct(first, false) << "\n"
            << "final   code " << pct(last, true) << " functional " << pct(last, false) << " after "
            << state.iteration << " iteration(s)\n"
            << "LLM calls " << usage.calls << ", tokens in " << usage.input_tokens << ", out " << usage.output_tokens
            << "\n"
            << "artifacts in " << s.out << "\n";
  }
  return kExitOk;
}

// report ---------------------------------------------------------------------

int cmd_report(Context& ctx, const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw InputError("run directory not found: " + dir);
  static const std::regex cov_re(R"(coverage_iter(\d+)\.txt)");
  std::vector<std::pair<int, fs::path>> reports;
  for (const auto& e : fs::directory_iterator(root)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, cov_re)) reports.emplace_back(std::stoi(m[1].str()), e.path());
  }
  std::sort(reports.begin(), reports.end());
  if (reports.empty() || reports.front().first != 0) throw InputError("no coverage_iter0.txt in " + dir);

  std::vector<CoverageReport> parsed;
  for (const auto& [n, p] : reports) parsed.push_back(parse_report(read_file(p)));

  std::string design = root.filename().string();
  if (fs::exists(root / "blueprint.json")) {
    auto bp = parse_blueprint(read_file(root / "blueprint.json"));
    if (bp.blueprint) design = bp.blueprint->design_name;
  }
  std::optional<TokenUsage> usage;
  if (fs::exists(root / "token_ledger.json")) {
    try {
      const json l = json::parse(read_file(root / "token_ledger.json"));
      usage = TokenUsage{l.at("total").at("calls").get<std::uint64_t>(), l.at("total").at("input_tokens").get<std::uint64_t>(),
                         l.at("total").at("output_tokens").get<std::uint64_t>()};
    } catch (const json::exception&) {
    }
  }

  const CoverageSummary& s1 = parsed.front().summary;
  const CoverageSummary& s2 = parsed.back().summary;
  auto value = [](const CoverageSummary& s, auto f) -> std::optional<double> {
    try {
      return f(s);
    } catch (const MissingMetric&) {
      return std::nullopt;
    }
  };
  struct Row {
    std::string name;
    std::optional<double> a, b;
  };
  std::vector<Row> rows;
  for (auto m : all_metrics()) {
    auto pa = s1.get(m) ? std::optional<double>(s1.get(m)->percent()) : std::nullopt;
    auto pb = s2.get(m) ? std::optional<double>(s2.get(m)->percent()) : std::nullopt;
    rows.push_back({std::string(to_string(m)), pa, pb});
  }
  rows.push_back({"code coverage", value(s1, compute_code_coverage), value(s2, compute_code_coverage)});
  rows.push_back({"functional coverage", value(s1, compute_functional_coverage), value(s2, compute_functional_coverage)});

  if (ctx.common.json) {
    json table = json::array();
    for (const auto& r : rows) {
      json row = {{"metric", r.name}, {"stage1", nullptr}, {"stage2", nullptr}};
      if (r.a) row["stage1"] = *r.a;
      if (r.b) row["stage2"] = *r.b;
      table.push_back(row);
    }
    json history = json::array();
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      json h = to_json(parsed[i].summary);
      h["iteration"] = reports[i].first;
      h["gaps"] = parsed[i].gaps.size();
      history.push_back(h);
    }
    json r = {{"design", design}, {"table", table}, {"history", history}};
    if (usage) r["llm"] = {{"calls", usage->calls}, {"input_tokens", usage->input_tokens}, {"output_tokens", usage->output_tokens}};
    ctx.out << r.dump(2) << "\n";
    return kExitOk;
  }

  auto cell = [](const std::optional<double>& v) { return v ? fixed2(*v) : std::string("-"); };
  ctx.out << "Design: " << design << "\n\n";
  ctx.out << std::left << std::setw(22) << "Metric" << std::right << std::setw(10) << "Stage 1" << std::setw(12)
          << "+Stage 2" << std::setw(10) << "Delta" << "\n";
  for (const auto& r : rows) {
    std::string delta = "-";
    if (r.a && r.b) delta = (*r.b >= *r.a ? "+" : "") + fixed2(*r.b - *r.a);
    ctx.out << std::left << std::setw(22) << r.name << std::right << std::setw(10) << cell(r.a) << std::setw(12)
            << cell(r.b) << std::setw(10) << delta << "\n";
  }
  ctx.out << "\n" << std::left << std::setw(8) << "Iter" << std::right << std::setw(10) << "Code" << std::setw(12)
          << "Functional" << std::setw(8) << "Gaps" << "\n";
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    ctx.out << std::left << std::setw(8) << reports[i].first << std::right << std::setw(10)
            << cell(value(parsed[i].summary, compute_code_coverage)) << std::setw(12)
            << cell(value(parsed[i].summary, compute_functional_coverage)) << std::setw(8) << parsed[i].gaps.size()
            << "\n";
  }
  if (usage) {
    ctx.out << "\nLLM calls " << usage->calls << ", tokens in " << usage->input_tokens << ", out "
            << usage->output_tokens << "\n";
  }
  return kExitOk;
}

int report_error(Context& ctx, int code, const std::string& kind, const std::string& msg,
                 const std::vector<std::string>& details = {}) {
  if (ctx.common.json) {
    json r = {{"error", kind}, {"message", msg}, {"exit_code", code}};
    if (!details.empty()) r["details"] = details;
    ctx.out << r.dump(2) << "\n";
  } else {
    ctx.err << "error: " << msg << "\n";
    for (const auto& d : details) ctx.err << "  " << d << "\n";
  }
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Generate UVM testbenches and stimulus sequences from a design Blueprint", "tbsynth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tbsynth 0.3.0");

  Context ctx{out, err, env, {}};
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", ctx.common.json, "Machine-readable output");
    sub->add_option("--config", ctx.common.config, "Config file (default: $HAVEN_CONFIG)");
  };

  BlueprintArgs bp_args;
  auto* bp_cmd = app.add_subcommand("blueprint", "Validate a Blueprint, or extract one from a specification");
  bp_cmd->add_option("input", bp_args.input, "Blueprint JSON or specification text")->required();
  bp_cmd->add_option("--out", bp_args.out, "Write the canonical Blueprint here");
  bp_cmd->add_option("--llm", bp_args.llm, "LLM backend for extraction");
  add_common(bp_cmd);

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "Render the testbench and lint it");
  render_cmd->add_option("blueprint", render_args.blueprint, "Blueprint JSON")->required();
  render_cmd->add_option("--out", render_args.out, "Output directory");
  add_common(render_cmd);

  DslArgs dsl_args;
  auto* dsl_cmd = app.add_subcommand("dsl", "Auto-fix, validate and compile a DSL document");
  dsl_cmd->add_option("input", dsl_args.input, "DSL JSON document")->required();
  dsl_cmd->add_option("--blueprint,-b", dsl_args.blueprint, "Blueprint JSON")->required();
  dsl_cmd->add_flag("--check", dsl_args.check, "Validate only");
  dsl_cmd->add_option("--out", dsl_args.out, "Output .sv file (default: stdout)");
  dsl_cmd->add_option("--iteration", dsl_args.iteration, "Iteration number for the registry class")
      ->check(CLI::Range(0, 1000000));
  add_common(dsl_cmd);

  RunArgs run_args;
  std::optional<std::string> run_k, run_fix, run_llm, run_sim, run_out, run_threshold;
  auto* run_cmd = app.add_subcommand("run", "Run both stages end to end");
  run_cmd->add_option("spec", run_args.spec, "Design specification text");
  run_cmd->add_option("--blueprint", run_args.blueprint, "Start from this Blueprint instead of extracting one");
  run_cmd->add_option("--k", run_k, "Maximum Stage-2 iterations");
  run_cmd->add_option("--max-fix", run_fix, "Maximum compile-fix iterations");
  run_cmd->add_option("--threshold", run_threshold, "Convergence threshold in percentage points");
  run_cmd->add_option("--llm", run_llm, "scripted:<dir> or http");
  run_cmd->add_option("--sim", run_sim, "mock:<profile> or external:<cmd>");
  run_cmd->add_option("--out", run_out, "Artifact directory");
  add_common(run_cmd);

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Coverage history of a run directory");
  report_cmd->add_option("run_dir", report_dir, "Run artifact directory")->required();
  add_common(report_cmd);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*bp_cmd) return cmd_blueprint(ctx, bp_args);
    if (*render_cmd) return cmd_render(ctx, render_args);
    if (*dsl_cmd) return cmd_dsl(ctx, dsl_args);
    if (*run_cmd) {
      if (run_k) run_args.flags["run.k"] = *run_k;
      if (run_fix) run_args.flags["run.max_fix"] = *run_fix;
      if (run_threshold) run_args.flags["run.threshold"] = *run_threshold;
      if (run_llm) run_args.flags["llm.backend"] = *run_llm;
      if (run_sim) run_args.flags["sim.backend"] = *run_sim;
      if (run_out) run_args.flags["run.out"] = *run_out;
      return cmd_run(ctx, run_args);
    }
    if (*report_cmd) return cmd_report(ctx, report_dir);
  } catch (const CompileFixExhausted& e) {
    return report_error(ctx, kExitFixExhausted, "CompileFixExhausted", e.what(), {e.last_log()});
  } catch (const BlueprintRejected& e) {
    return report_error(ctx, kExitBlueprintRejected, "BlueprintRejected", e.what(), e.reasons());
  } catch (const BackendUnavailable& e) {
    return report_error(ctx, kExitInputError, "BackendUnavailable", e.what());
  } catch (const ConfigError& e) {
    return report_error(ctx, kExitInputError, "ConfigError", e.what());
  } catch (const Error& e) {
    return report_error(ctx, kExitInputError, "Error", e.what());
  } catch (const std::exception& e) {
    return report_error(ctx, kExitInputError, "Error", e.what());
  }
  return kExitInputError;
}

}  // namespace tbsynth::cli
