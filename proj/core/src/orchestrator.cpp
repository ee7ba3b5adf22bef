#include "tbsynth/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

CompileFixExhausted::CompileFixExhausted(int iterations, std::string last_log)
    : Error("compile still failing after " + std::to_string(iterations) + " fix iterations"),
      iterations_(iterations),
      last_log_(std::move(last_log)) {}

json to_json(const RunEvent& e) {
  json j = {{"ts", e.ts}, {"step", e.step}, {"event", e.event}};
  for (auto it = e.detail.begin(); it != e.detail.end(); ++it) j[it.key()] = it.value();
  return j;
}

const RenderedComponent* PipelineState::find_component(std::string_view file_name) const {
  for (const auto& c : components) {
    if (c.file_name == file_name) return &c;
  }
  return nullptr;
}

FileSet PipelineState::file_set() const {
  FileSet out;
  for (const auto& c : components) {
    if (c.kind == ComponentKind::kTop) out.push_back({c.file_name, c.content});
  }
  for (const auto& c : components) {
    if (c.kind != ComponentKind::kTop) out.push_back({c.file_name, c.content});
  }
  return out;
}

std::string protocol_flows(const Blueprint& bp) {
  const BusRoles roles = resolve_bus_roles(bp);
  auto sig = [&](const std::string& role) {
    auto it = roles.find(role);
    return it == roles.end() ? role : it->second;
  };
  std::ostringstream o;
  switch (bp.protocol.type) {
    case Protocol::kWishbone:
      o << "Wishbone register write: " << sig("adr") << " = address, " << sig("dat_w") << " = data, " << sig("we")
        << " = 1, " << sig("cyc") << " and " << sig("stb") << " high until " << sig("ack") << ".\n"
        << "Wishbone register read: " << sig("adr") << " = address, " << sig("we") << " = 0, " << sig("cyc")
        << " and " << sig("stb") << " high until " << sig("ack") << "; data returns on " << sig("dat_r") << ".\n";
      break;
    case Protocol::kAxi4Lite:
      o << "AXI4-Lite write: address on " << sig("awaddr") << " with " << sig("awvalid") << "/" << sig("awready")
        << ", data on " << sig("wdata") << " with " << sig("wvalid") << "/" << sig("wready") << ", response on "
        << sig("bvalid") << "/" << sig("bready") << ".\n"
        << "AXI4-Lite read: address on " << sig("araddr") << " with " << sig("arvalid") << "/" << sig("arready")
        << ", data on " << sig("rdata") << " with " << sig("rvalid") << "/" << sig("rready") << ".\n";
      break;
    case Protocol::kDirect:
      o << "Direct interface (" << to_string(bp.protocol.variant)
        << "): each transaction drives the stimulus fields, then waits for the handshake.\n";
      break;
  }
  o << "Registers are only reachable through register_write, register_read and poll steps.\n";
  return o.str();
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_package_file(const RenderedComponent& c) {
  return c.kind == ComponentKind::kSequencePkg && text::starts_with(c.file_name, "sequence_pkg_iter");
}

// seq_item, then sequence packages, then the include list.
int dependency_rank(const RenderedComponent& c) {
  if (c.kind == ComponentKind::kSeqItem) return 0;
  if (is_package_file(c)) return 1;
  return 2;
}

json summary_detail(const CoverageSummary& s, std::size_t gaps) {
  json d = {{"gaps", gaps}};
  try {
    d["code_coverage"] = s.code_coverage();
  } catch (const MissingMetric&) {
  }
  try {
    d["functional_coverage"] = s.functional_coverage();
  } catch (const MissingMetric&) {
  }
  return d;
}

}  // namespace

Orchestrator::Orchestrator(RunConfig config, LlmClient& llm, SimulatorBackend& sim)
    : config_(std::move(config)), llm_(llm), sim_(sim) {
  if (!config_.clock) config_.clock = utc_now;
  if (config_.k < 0) throw Error("k must be >= 0");
  if (config_.max_fix_iterations < 0) throw Error("max_fix_iterations must be >= 0");
  if (!config_.out_dir.empty()) {
    std::filesystem::create_directories(config_.out_dir / "rendered");
    std::ofstream(config_.out_dir / "run_log.jsonl", std::ios::trunc);
  }
}

void Orchestrator::log(PipelineState& state, std::string step, std::string event, json detail) {
  RunEvent e{config_.clock(), std::move(step), std::move(event), std::move(detail)};
  if (!config_.out_dir.empty()) {
    std::ofstream out(config_.out_dir / "run_log.jsonl", std::ios::app | std::ios::binary);
    out << to_json(e).dump() << "\n";
  }
  state.events.push_back(std::move(e));
}

void Orchestrator::write_artifact(const std::filesystem::path& rel, std::string_view content) const {
  if (config_.out_dir.empty()) return;
  const auto path = config_.out_dir / rel;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

void Orchestrator::persist_components(const PipelineState& state) const {
  for (const auto& c : state.components) {
    write_artifact(is_package_file(c) ? std::filesystem::path(c.file_name)
                                      : std::filesystem::path("rendered") / c.file_name,
                   c.content);
  }
}

void Orchestrator::persist_ledger() const { write_artifact("token_ledger.json", llm_.ledger().to_json().dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Stage 1

Blueprint Orchestrator::extract_blueprint(PipelineState& state, std::string_view spec_text) {
  std::vector<std::string> errors;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string text = llm_.extract_blueprint(spec_text, errors);
    errors.clear();
    auto parsed = parse_blueprint(text);
    if (!parsed.ok()) {
      for (const auto& e : parsed.errors) errors.push_back(e.to_string());
    } else {
      const auto report = consistency_check(*parsed.blueprint);
      if (report.passed()) {
        log(state, "blueprint", "accepted", {{"attempt", attempt + 1}, {"design", parsed.blueprint->design_name}});
        return std::move(*parsed.blueprint);
      }
      for (const auto& i : report.issues) errors.push_back(i.to_string());
    }
    log(state, "blueprint", "rejected", {{"attempt", attempt + 1}, {"errors", errors}});
    if (attempt == 0) {
      ++state.blueprint_retries;
      log(state, "blueprint", "retry", {{"errors", errors.size()}});
    }
  }
  throw BlueprintRejected(errors);
}

PipelineState Orchestrator::run_stage1(std::string_view spec_text) {
  PipelineState state;
  log(state, "stage1", "start");
  try {
    state.blueprint = extract_blueprint(state, spec_text);
  } catch (const Error& e) {
    log(state, "blueprint", "failed", {{"error", e.what()}});
    persist_ledger();
    throw;
  }
  stage1_from_blueprint(state);
  return state;
}

PipelineState Orchestrator::run_stage1(const Blueprint& bp) {
  PipelineState state;
  log(state, "stage1", "start");
  const auto report = consistency_check(bp);
  if (!report.passed()) {
    std::vector<std::string> errors;
    for (const auto& i : report.issues) errors.push_back(i.to_string());
    log(state, "blueprint", "rejected", {{"errors", errors}});
    throw BlueprintRejected(errors);
  }
  state.blueprint = bp;
  log(state, "blueprint", "accepted", {{"attempt", 0}, {"design", bp.design_name}});
  stage1_from_blueprint(state);
  return state;
}

void Orchestrator::stage1_from_blueprint(PipelineState& state) {
  const Blueprint& bp = state.blueprint;
  write_artifact("blueprint.json", serialize_blueprint(bp));

  state.strategies = infer_all(bp);
  write_artifact("strategies.json", to_json(state.strategies).dump(2) + "\n");
  log(state, "strategies", "inferred", {{"fields", state.strategies.size()}});

  state.components = render_all(bp, state.strategies);
  std::vector<std::string> names;
  for (const auto& c : state.components) names.push_back(c.file_name);
  log(state, "render", "rendered", {{"files", names}});

  PredefinedResult pre = infer_predefined(bp, state.strategies, config_.predefined);
  state.triggers = pre.report;
  state.sequences = pre.sequences;
  state.predefined_count = pre.sequences.size();
  DslDocument doc;
  doc.sequences = pre.sequences;
  write_artifact("predefined_seqs.json", serialize_dsl(doc));
  std::vector<std::string> seq_names;
  for (const auto& s : pre.sequences) seq_names.push_back(s.name);
  log(state, "predefined", "generated", {{"sequences", seq_names}, {"triggers", to_json(pre.report)}});

  state.components.push_back({ComponentKind::kSequencePkg, sequence_package_file_name(0),
                              generate_sequence_package(pre.sequences, bp, 0), false});
  refresh_sequences_include(state);
  persist_components(state);

  try {
    compile_fix_loop(state);
  } catch (const Error& e) {
    log(state, "compile", "failed", {{"error", e.what()}});
    persist_ledger();
    throw;
  }
  simulate(state, 0);
  persist_ledger();
  log(state, "stage1", "done");
}

void Orchestrator::refresh_sequences_include(PipelineState& state) {
  std::string text = "// Sequence packages, oldest first\n";
  for (const auto& c : state.components) {
    if (is_package_file(c)) text += "`include \"" + c.file_name + "\"\n";
  }
  const std::string name = sequences_include_file_name(state.blueprint);
  for (auto& c : state.components) {
    if (c.file_name == name) {
      c.content = text;
      return;
    }
  }
  state.components.push_back({ComponentKind::kSequencePkg, name, text, false});
}

void Orchestrator::simulate(PipelineState& state, int iteration) {
  std::string text = sim_.simulate(state.file_set(), state.sequences);
  write_artifact("coverage_iter" + std::to_string(iteration) + ".txt", text);
  CoverageReport report = parse_report(text);
  json detail = summary_detail(report.summary, report.gaps.size());
  detail["iteration"] = iteration;
  if (!report.warnings.empty()) detail["warnings"] = report.warnings;
  state.history.push_back(report.summary);
  state.last_report = std::move(text);
  log(state, "simulate", "coverage", std::move(detail));
}

// ---------------------------------------------------------------------------
// Compile-fix

void Orchestrator::apply_edits(PipelineState& state, const std::vector<FileEdit>& edits) {
  for (const auto& e : edits) {
    RenderedComponent* target = nullptr;
    for (auto& c : state.components) {
      if (c.file_name == e.file) target = &c;
    }
    if (target == nullptr) {
      log(state, "compile_fix", "UnknownFileEditRejected", {{"file", e.file}});
      continue;
    }
    if (target->is_protected) {
      log(state, "compile_fix", "ProtectedFileEditRejected", {{"file", e.file}});
      continue;
    }
    if (e.content) {
      target->content = *e.content;
    } else {
      const auto pos = target->content.find(e.search);
      if (pos == std::string::npos) {
        log(state, "compile_fix", "EditNotApplied", {{"file", e.file}, {"reason", "search text not found"}});
        continue;
      }
      target->content.replace(pos, e.search.size(), e.replace);
    }
    log(state, "compile_fix", "edit_applied", {{"file", e.file}});
  }
}

void Orchestrator::compile_fix_loop(PipelineState& state) {
  for (int attempt = 0;; ++attempt) {
    const CompileResult r = sim_.compile(state.file_set());
    log(state, "compile", r.success ? "success" : "failure", {{"attempt", attempt}});
    if (r.success) {
      persist_components(state);
      return;
    }
    if (attempt >= config_.max_fix_iterations) {
      log(state, "compile", "CompileFixExhausted", {{"iterations", attempt}});
      throw CompileFixExhausted(attempt, r.error_log);
    }

    std::vector<const RenderedComponent*> editable;
    for (const auto& c : state.components) {
      if (!c.is_protected) editable.push_back(&c);
    }
    std::stable_sort(editable.begin(), editable.end(), [](const auto* a, const auto* b) {
      return dependency_rank(*a) < dependency_rank(*b);
    });
    // Fix the earliest file the log names; later files depend on it.
    NamedFiles files;
    for (const auto* c : editable) {
      if (r.error_log.find(c->file_name) != std::string::npos) {
        files.emplace_back(c->file_name, c->content);
        break;
      }
    }
    if (files.empty()) {
      for (const auto* c : editable) files.emplace_back(c->file_name, c->content);
    }

    ++state.fix_iterations;
    std::vector<std::string> shown;
    for (const auto& f : files) shown.push_back(f.first);
    log(state, "compile_fix", "propose_fix", {{"iteration", attempt + 1}, {"files", shown}});
    try {
      apply_edits(state, llm_.propose_fix(r.error_log, files));
    } catch (const LlmResponseError& e) {
      log(state, "compile_fix", "FixResponseRejected", {{"error", e.what()}});
    }
  }
}

// ---------------------------------------------------------------------------
// Stage 2

bool Orchestrator::stage2_iteration(PipelineState& state, int i) {
  const Blueprint& bp = state.blueprint;
  const CoverageReport latest = parse_report(state.last_report);

  std::string flows = protocol_flows(bp);
  if (!config_.protocol_notes.empty()) flows += config_.protocol_notes + "\n";
  const std::string prompt = render_gap_prompt(latest.gaps, state.sequences, bp, flows);
  const std::string response = llm_.generate_dsl(prompt);
  log(state, "stage2", "dsl_response", {{"iteration", i}, {"gaps", latest.gaps.size()}});

  json doc;
  try {
    doc = json::parse(response);
  } catch (const json::parse_error& e) {
    log(state, "stage2", "DslRejected", {{"iteration", i}, {"reason", std::string("invalid JSON: ") + e.what()}});
    return true;
  }

  AutoFixResult fixed = auto_fix(doc, bp);
  if (!fixed.log.empty()) {
    json entries = json::array();
    for (const auto& f : fixed.log) {
      entries.push_back({{"sequence", f.sequence}, {"step", f.step}, {"rule", to_string(f.rule)},
                         {"before", f.before}, {"after", f.after}});
    }
    log(state, "stage2", "auto_fix", {{"iteration", i}, {"fixes", entries}});
  }

  DecodedDocument decoded = decode_document(fixed.document);
  for (const auto& e : decoded.errors) {
    log(state, "stage2", "sequence_rejected", {{"iteration", i}, {"error", e.to_string()}});
  }

  std::set<std::string> taken;
  for (const auto& s : state.sequences) taken.insert(s.name);
  std::vector<DslSequence> accepted;
  for (const auto& seq : decoded.sequences) {
    FilterResult fr = apply_safety_filters(seq, bp);
    for (const auto& f : fr.log) {
      log(state, "stage2", f.action, {{"iteration", i}, {"sequence", seq.name}, {"step", f.step}, {"reason", f.reason}});
    }
    if (fr.rejected || !fr.sequence) continue;
    DslSequence s = std::move(*fr.sequence);
    if (taken.count(s.name)) {
      std::string name = s.name + "_iter" + std::to_string(i);
      for (int n = 2; taken.count(name); ++n) name = s.name + "_iter" + std::to_string(i) + "_" + std::to_string(n);
      log(state, "stage2", "sequence_renamed", {{"iteration", i}, {"from", s.name}, {"to", name}});
      s.name = name;
    }
    taken.insert(s.name);
    accepted.push_back(std::move(s));
  }

  if (accepted.empty()) {
    log(state, "stage2", "DslRejected", {{"iteration", i}, {"reason", "no sequence survived validation"}});
    return true;
  }

  std::string package;
  try {
    package = generate_sequence_package(accepted, bp, i);
  } catch (const Error& e) {
    log(state, "stage2", "DslRejected", {{"iteration", i}, {"reason", e.what()}});
    return true;
  }

  DslDocument out;
  out.sequences = accepted;
  write_artifact("dsl_iter" + std::to_string(i) + ".json", serialize_dsl(out));
  std::vector<std::string> names;
  for (const auto& s : accepted) names.push_back(s.name);
  state.sequences.insert(state.sequences.end(), accepted.begin(), accepted.end());
  state.components.push_back({ComponentKind::kSequencePkg, sequence_package_file_name(i), std::move(package), false});
  refresh_sequences_include(state);
  persist_components(state);
  log(state, "stage2", "sequences_added", {{"iteration", i}, {"sequences", names}});

  compile_fix_loop(state);
  simulate(state, i);
  const auto& h = state.history;
  if (converged(h[h.size() - 2], h.back(), config_.convergence_threshold)) {
    log(state, "stage2", "converged", {{"iteration", i}});
    return false;
  }
  return true;
}

void Orchestrator::run_stage2(PipelineState& state) {
  if (state.history.empty()) throw Error("run_stage2 needs a Stage-1 simulation");
  log(state, "stage2", "start", {{"k", config_.k}});
  try {
    for (int i = 1; i <= config_.k; ++i) {
      const CoverageReport latest = parse_report(state.last_report);
      if (latest.gaps.empty()) {
        log(state, "stage2", "no_gaps", {{"iteration", i}});
        break;
      }
      const bool more = stage2_iteration(state, i);
      state.iteration = i;
      persist_ledger();
      if (!more) break;
      if (i == config_.k) log(state, "stage2", "max_iterations", {{"k", config_.k}});
    }
  } catch (const Error& e) {
    log(state, "stage2", "failed", {{"error", e.what()}});
    persist_ledger();
    throw;
  }
  persist_ledger();
  log(state, "stage2", "done", {{"iterations", state.iteration}});
}

PipelineState Orchestrator::run(std::string_view spec_text) {
  PipelineState state = run_stage1(spec_text);
  run_stage2(state);
  return state;
}

}  // namespace tbsynth
