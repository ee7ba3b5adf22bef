#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsl_pipeline.hpp"
#include "tbsynth/coverage.hpp"
#include "tbsynth/orchestrator.hpp"
#include "tbsynth/protocol_lint.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using nlohmann::json;
using tbsynth::testing::fixture;
using tbsynth::testing::fixture_dir;
using tbsynth::testing::golden_dir;
using tbsynth::testing::load_blueprint;
using tbsynth::testing::read_file;
using tbsynth::testing::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Returns an empty string on success, otherwise the first failure.
using Check = std::function<std::string()>;

#define REQUIRE(cond, msg)         \
  do {                             \
    if (!(cond)) return (msg);     \
  } while (0)

LintTarget lint_target(ComponentKind k) {
  switch (k) {
    case ComponentKind::kDriver: return LintTarget::kDriver;
    case ComponentKind::kMonitor: return LintTarget::kMonitor;
    case ComponentKind::kBfm: return LintTarget::kBfm;
    case ComponentKind::kSequencePkg: return LintTarget::kSequence;
    default: return LintTarget::kOther;
  }
}

std::string driver_key(const Blueprint& bp) { return protocol_scope_name(bp.protocol); }

std::string lint_matrix() {
  const char* names[] = {"ethmac_wb.json",  "gpio_wb.json",     "uart_wb.json",    "spi_wb.json",
                         "dma_wb.json",     "i2c_wb.json",      "sdram_wb.json",   "timer_axil.json",
                         "uart_axil.json",  "gpio_axil.json",   "alu_direct.json", "mult_direct.json",
                         "aes_direct.json", "crc_direct.json",  "sha_direct.json", "div_direct.json",
                         "huf_direct.json", "fir_direct.json"};
  std::vector<Blueprint> bps;
  for (const char* n : names) bps.push_back(load_blueprint(n));
  const auto start = Clock::now();
  std::map<std::string, int> per_driver;
  for (const auto& bp : bps) {
    for (const auto& c : render_all(bp, infer_all(bp))) {
      const auto r = check_protocol_rules(c.content, bp, lint_target(c.kind));
      REQUIRE(r.passed(), bp.design_name + "/" + c.file_name + ": " + r.summary());
    }
    ++per_driver[driver_key(bp)];
  }
  const double t = seconds_since(start);
  REQUIRE(per_driver.size() == 6, "expected 6 driver templates, saw " + std::to_string(per_driver.size()));
  for (const auto& [k, n] : per_driver) REQUIRE(n >= 2, k + " has only " + std::to_string(n) + " Blueprint");
  REQUIRE(t < 5.0, "lint matrix took " + std::to_string(t) + " s");
  return {};
}

std::string step_types() {
  const char* types[] = {"register_write", "register_read", "poll",         "randomize_send", "delay",
                         "memory_write",   "bfm_action",    "config_sweep", "value_sweep",    "toggle_pattern"};
  const auto bp = load_blueprint("sdram_wb.json");
  for (const char* t : types) {
    REQUIRE(step_type_from_string(t).has_value(), std::string(t) + " not accepted");
    const auto v = validate(auto_fix(json::parse(fixture(std::string("dsl/steps/") + t + ".json")), bp).document, bp);
    REQUIRE(v.ok(), std::string(t) + ": " + v.errors.front().to_string());
    const std::string sv = generate_sequence(v.document->sequences.at(0), bp);
    REQUIRE(sv == read_file(golden_dir() / "steps" / (std::string(t) + ".sv")), std::string(t) + " differs from golden");
  }
  const json eleventh = {{"schema_version", "1"},
                         {"sequences", {{{"name", "x"}, {"steps", {{{"type", "inject_fault"}}}}}}}};
  const auto bad = validate(eleventh, bp);
  REQUIRE(!bad.ok() && bad.errors.front().kind == DslErrorKind::kUnknownStepType, "11th step type not rejected");

  const auto eth = load_blueprint("ethmac_wb.json");
  const auto mii = validate(auto_fix(json::parse(fixture("dsl/ethmac_mii_read.json")), eth).document, eth);
  REQUIRE(mii.ok(), "MII read document invalid");
  const std::string sv = generate_sequence(mii.document->sequences.at(0), eth);
  const auto s = sv.find("start_item(");
  const auto f = sv.find("finish_item(", s == std::string::npos ? 0 : s);
  const auto loop = sv.find("do begin", f == std::string::npos ? 0 : f);
  REQUIRE(s != std::string::npos && f != std::string::npos, "no start_item/finish_item pair");
  REQUIRE(loop != std::string::npos, "no do-while after the write");
  const auto w = sv.find("end while", loop);
  REQUIRE(w != std::string::npos && sv.substr(w, sv.find(';', w) - w).find("seq_poll_count < 100") != std::string::npos,
          "poll loop is not bounded");
  return {};
}

std::string safety_filters() {
  const auto bp = load_blueprint("ethmac_wb.json");
  const json from_dut = json::parse(R"({"schema_version": "1", "sequences": [{"name": "s", "steps": [
      {"type": "randomize_send", "constraints": [{"field": "wb_dat_o", "relation": "eq", "operand": 1}]}]}]})");
  const auto a = tbsynth::testing::filter_document(from_dut, bp);
  REQUIRE(a.dropped == 1 && a.accepted.size() == 1 && a.accepted[0].steps[0].constraints.empty(),
          "from_dut constraint not dropped and logged");
  const json ghost = json::parse(R"({"schema_version": "1", "sequences": [{"name": "s", "steps": [
      {"type": "value_sweep", "field": "no_such_signal", "values": [1, 2]}, {"type": "delay", "cycles": 5}]}]})");
  const auto b = tbsynth::testing::filter_document(ghost, bp);
  REQUIRE(b.rejected == 1 && b.accepted.size() == 1 && b.accepted[0].steps.size() == 1,
          "step on a nonexistent signal not rejected");
  const json corpus = json::parse(fixture("dsl/adversarial_corpus.json"));
  REQUIRE(corpus.size() == 20, "corpus has " + std::to_string(corpus.size()) + " cases");
  int ok = 0;
  std::string first;
  for (const auto& c : corpus) {
    const std::string diff = tbsynth::testing::check_corpus_case(c, load_blueprint(c.at("blueprint")));
    if (diff.empty()) ++ok;
    else if (first.empty()) first = c.at("name").get<std::string>() + ": " + diff;
  }
  REQUIRE(ok == 20, std::to_string(ok) + "/20 corpus cases; " + first);
  return {};
}

std::string strategy_property() {
  const FieldRole roles[] = {FieldRole::kData, FieldRole::kConfig, FieldRole::kControl, FieldRole::kStatus};
  int cases = 0;
  for (FieldRole role : roles) {
    for (int w = 1; w <= 32; ++w) {
      const std::uint64_t max = (1ULL << w) - 1;
      for (std::optional<std::uint64_t> def : {std::optional<std::uint64_t>(), std::optional<std::uint64_t>(0),
                                               std::optional<std::uint64_t>(max)}) {
        SeqItemField f;
        f.name = "f";
        f.role = role;
        f.width = w;
        f.default_value = def;
        const auto s = infer_strategy(f);
        const std::string where = std::string(to_string(role)) + " w" + std::to_string(w) + (def ? " default" : "");
        if (role == FieldRole::kConfig && def) {
          REQUIRE(s.kind == StrategyKind::kFixed && s.fixed_value == *def, where + ": expected fixed");
        } else if (w <= 4) {
          REQUIRE(s.kind == StrategyKind::kEnumerate, where + ": expected enumerate");
          REQUIRE(s.values.size() == (std::size_t{1} << w), where + ": wrong enumerate length");
          for (std::uint64_t i = 0; i < s.values.size(); ++i) REQUIRE(s.values[i] == i, where + ": wrong values");
        } else {
          REQUIRE(s.kind == StrategyKind::kCrv, where + ": expected crv");
        }
        ++cases;
      }
    }
  }
  REQUIRE(cases == 4 * 32 * 3, "case count");
  return {};
}

std::string trigger_matrix() {
  const json matrix = json::parse(fixture("trigger_matrix.json"));
  REQUIRE(matrix.size() == 10, "matrix needs 10 Blueprints");
  for (auto it = matrix.begin(); it != matrix.end(); ++it) {
    const auto bp = load_blueprint(it.key());
    const auto st = infer_all(bp);
    const auto report = evaluate_triggers(bp, st);
    const auto pre = infer_predefined(bp, st);
    REQUIRE(report.fired(PredefinedKind::kCrv), it.key() + ": CRV did not fire");
    for (auto k : all_predefined_kinds()) {
      const std::string name(to_string(k));
      const bool want = it.value().at(name).get<bool>();
      REQUIRE(report.fired(k) == want, it.key() + ": " + name + " fired=" + (report.fired(k) ? "1" : "0"));
      const bool emitted = std::any_of(pre.sequences.begin(), pre.sequences.end(),
                                       [&](const DslSequence& s) { return s.name.rfind(name + "_", 0) == 0; });
      REQUIRE(emitted == want, it.key() + ": " + name + " sequences do not match the trigger");
    }
  }
  return {};
}

std::string compile_fix_exhaustion() {
  ScriptedLlmClient llm;
  for (int i = 0; i < 10; ++i) {
    llm.push(LlmTask::kProposeFix, R"({"edits": [{"file": "ethmac_driver.sv", "content": "broken"},
                                                 {"file": "ethmac_monitor.sv", "search": "class", "replace": "klass"}]})");
  }
  MockSimulator sim(load_dut_profile(fixture_dir() / "profiles" / "ethmac_always_fail.json"));
  TempDir out("acc_fix");
  RunConfig cfg;
  cfg.out_dir = out.path();
  cfg.clock = [] { return std::string("2024-01-01T00:00:00Z"); };
  Orchestrator orch(cfg, llm, sim);
  const auto bp = load_blueprint("ethmac_wb.json");
  const auto original = render_all(bp, infer_all(bp));
  bool raised = false;
  try {
    orch.run_stage1(bp);
  } catch (const CompileFixExhausted& e) {
    raised = e.iterations() == 5;
  }
  REQUIRE(raised, "CompileFixExhausted not raised after 5 iterations");
  const auto fixes = std::count_if(llm.calls().begin(), llm.calls().end(),
                                   [](const auto& c) { return c.task == LlmTask::kProposeFix; });
  REQUIRE(fixes == 5, std::to_string(fixes) + " fix iterations");
  int protected_files = 0;
  for (const auto& c : original) {
    if (!c.is_protected) continue;
    ++protected_files;
    REQUIRE(read_file(out.path() / "rendered" / c.file_name) == c.content, c.file_name + " changed");
  }
  REQUIRE(protected_files >= 3, "too few protected files");
  return {};
}

std::string report_text(double code, double func) {
  CoverageSummary s;
  for (auto m : all_metrics()) s.set(m, {static_cast<std::uint64_t>(std::llround(code * 100)), 10000});
  s.set(Metric::kGroup, {static_cast<std::uint64_t>(std::llround(func * 100)), 10000});
  return serialize_report(s, {*parse_gap_line("LINE top.v 1")});
}

std::string stage2_loop() {
  const auto start = Clock::now();
  const auto bp = load_blueprint("ethmac_wb.json");
  const std::string mii_read = fixture("dsl/ethmac_mii_read.json");
  auto make = [&](std::vector<double> cov, int k, ScriptedLlmClient& llm) {
    for (int i = 0; i < 10; ++i) llm.push(LlmTask::kGenerateDsl, mii_read);
    auto sim = std::make_shared<ScriptedSimulator>();
    for (double c : cov) sim->push_report(report_text(c, c));
    RunConfig cfg;
    cfg.k = k;
    cfg.clock = [] { return std::string("2024-01-01T00:00:00Z"); };
    Orchestrator orch(cfg, llm, *sim);
    auto state = orch.run_stage1(bp);
    const auto before = state.sequences;
    orch.run_stage2(state);
    return std::make_pair(state, before);
  };
  {
    ScriptedLlmClient llm;
    auto [state, before] = make({90.0, 90.05, 95.0}, 3, llm);
    REQUIRE(state.iteration == 1 && state.history.size() == 2, "no early stop when both deltas < 0.1");
  }
  {
    ScriptedLlmClient llm;
    auto [state, before] = make({10, 20, 30, 40, 50, 60}, 3, llm);
    REQUIRE(state.iteration == 3 && state.history.size() == 4, "K=3 did not cap the loop");
    REQUIRE(state.sequences.size() == before.size() + 3, "sequences not accumulated");
    REQUIRE(std::equal(before.begin(), before.end(), state.sequences.begin()), "earlier sequences changed");
  }
  {
    ScriptedLlmClient llm;
    MockSimulator sim(load_dut_profile(fixture_dir() / "profiles" / "ethmac_zero_gap.json"));
    Orchestrator orch(RunConfig{}, llm, sim);
    auto state = orch.run_stage1(bp);
    orch.run_stage2(state);
    REQUIRE(llm.calls().empty(), "LLM called with zero gaps");
  }
  {
    ScriptedLlmClient llm(fixture_dir() / "llm" / "ethmac_run");
    MockSimulator sim(load_dut_profile(fixture_dir() / "profiles" / "ethmac_normal.json"));
    Orchestrator orch(RunConfig{}, llm, sim);
    auto state = orch.run(fixture("llm/ethmac_run/spec.txt"));
    REQUIRE(state.iteration >= 1, "mock run did not enter Stage 2");
  }
  const double t = seconds_since(start);
  REQUIRE(t < 10.0, "mock runs took " + std::to_string(t) + " s");
  return {};
}

std::string code_coverage_formula() {
  CoverageSummary s;
  s.set(Metric::kLine, {80, 100});
  s.set(Metric::kCondition, {90, 100});
  s.set(Metric::kToggle, {70, 100});
  s.set(Metric::kBranch, {100, 100});
  s.set(Metric::kFsmState, {60, 100});
  s.set(Metric::kFsmTransition, {60, 100});
  REQUIRE(compute_code_coverage(s) == 80.0, "worked example is not 80.0");
  for (std::uint64_t g : {0u, 37u, 100u}) {
    s.set(Metric::kGroup, {g, 100});
    REQUIRE(compute_code_coverage(s) == 80.0, "group metric changes code coverage");
  }
  return {};
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir, bool normalize_ts) {
  static const std::regex ts(R"("ts":"[^"]*")");
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir).string();
    std::string text = read_file(e.path());
    if (normalize_ts && rel == "run_log.jsonl") text = std::regex_replace(text, ts, "\"ts\":\"\"");
    out[rel] = text;
  }
  return out;
}

std::string determinism() {
  auto run_into = [](const std::filesystem::path& dir, bool fixed_clock) {
    ScriptedLlmClient llm(fixture_dir() / "llm" / "ethmac_run");
    MockSimulator sim(load_dut_profile(fixture_dir() / "profiles" / "ethmac_normal.json"));
    RunConfig cfg;
    cfg.out_dir = dir;
    if (fixed_clock) cfg.clock = [] { return std::string("2024-01-01T00:00:00Z"); };
    Orchestrator orch(cfg, llm, sim);
    orch.run(fixture("llm/ethmac_run/spec.txt"));
  };
  TempDir a("acc_det_a"), b("acc_det_b"), c("acc_det_c"), d("acc_det_d");
  run_into(a.path(), false);
  run_into(b.path(), false);
  const auto sa = snapshot(a.path(), true);
  REQUIRE(sa.size() >= 10, "too few artifacts");
  REQUIRE(sa == snapshot(b.path(), true), "artifact dirs differ after ts normalization");
  run_into(c.path(), true);
  run_into(d.path(), true);
  REQUIRE(snapshot(c.path(), false) == snapshot(d.path(), false), "fixed-clock runs are not byte-identical");
  return {};
}

std::string report_round_trip() {
  const std::string text = fixture("coverage/ethmac_50.txt");
  std::size_t lines = std::count(text.begin(), text.end(), '\n');
  if (!text.empty() && text.back() != '\n') ++lines;
  REQUIRE(lines == 50, "report has " + std::to_string(lines) + " lines");
  const auto first = parse_report(text);
  REQUIRE(first.warnings.empty(), "warnings: " + first.warnings.front());
  REQUIRE(first.gaps.size() == 41, "gap count " + std::to_string(first.gaps.size()));
  const auto second = parse_report(serialize_report(first.summary, first.gaps));
  REQUIRE(second.summary == first.summary && second.gaps == first.gaps, "round trip differs");
  return {};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Check>> checks = {
      {"lint-clean templates (6 drivers x 2+ Blueprints, < 5 s)", lint_matrix},
      {"10 DSL step types with goldens, 11th rejected, MII read loop", step_types},
      {"safety filters and 20-case adversarial corpus", safety_filters},
      {"strategy mapping over role x width x default", strategy_property},
      {"predefined trigger matrix over 10 Blueprints", trigger_matrix},
      {"compile-fix exhaustion after 5 iterations, protected files intact", compile_fix_exhaustion},
      {"Stage-2 loop: early stop, K cap, append-only, zero gaps, < 10 s", stage2_loop},
      {"code coverage formula ignores group", code_coverage_formula},
      {"deterministic artifact directories", determinism},
      {"coverage report round trip", report_round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    std::string why;
    try {
      why = checks[i].second();
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    if (why.empty()) {
      std::printf("PASS %2zu %s\n", i + 1, checks[i].first.c_str());
    } else {
      ++failed;
      std::printf("FAIL %2zu %s: %s\n", i + 1, checks[i].first.c_str(), why.c_str());
    }
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
