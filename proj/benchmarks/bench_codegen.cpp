#include <fstream>
#include <sstream>
#include <string>

#include <benchmark/benchmark.h>
#include <nlohmann/json.hpp>

#include "tbsynth/coverage.hpp"
#include "tbsynth/predefined_seqs.hpp"
#include "tbsynth/protocol_lint.hpp"
#include "tbsynth/seq_dsl.hpp"
#include "tbsynth/templates.hpp"

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(TBSYNTH_FIXTURE_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const tbsynth::Blueprint& ethmac() {
  static const tbsynth::Blueprint bp = *tbsynth::parse_blueprint(slurp("blueprints/ethmac_wb.json")).blueprint;
  return bp;
}

void BM_ParseBlueprint(benchmark::State& state) {
  const std::string text = slurp("blueprints/ethmac_wb.json");
  for (auto _ : state) benchmark::DoNotOptimize(tbsynth::parse_blueprint(text));
}
BENCHMARK(BM_ParseBlueprint);

void BM_RenderTestbench(benchmark::State& state) {
  const auto strategies = tbsynth::infer_all(ethmac());
  for (auto _ : state) benchmark::DoNotOptimize(tbsynth::render_all(ethmac(), strategies));
}
BENCHMARK(BM_RenderTestbench);

void BM_LintDriver(benchmark::State& state) {
  const auto comps = tbsynth::render_all(ethmac(), tbsynth::infer_all(ethmac()));
  const auto* driver = &comps.front();
  for (const auto& c : comps) {
    if (c.kind == tbsynth::ComponentKind::kDriver) driver = &c;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(tbsynth::check_protocol_rules(driver->content, ethmac(), tbsynth::LintTarget::kDriver));
  }
}
BENCHMARK(BM_LintDriver);

void BM_PredefinedSequences(benchmark::State& state) {
  const auto strategies = tbsynth::infer_all(ethmac());
  for (auto _ : state) benchmark::DoNotOptimize(tbsynth::infer_predefined(ethmac(), strategies));
}
BENCHMARK(BM_PredefinedSequences);

void BM_DslToSystemVerilog(benchmark::State& state) {
  const auto doc = nlohmann::json::parse(slurp("dsl/ethmac_mii_read.json"));
  for (auto _ : state) {
    auto v = tbsynth::validate(tbsynth::auto_fix(doc, ethmac()).document, ethmac());
    if (!v.ok()) {
      state.SkipWithError("document does not validate");
      break;
    }
    benchmark::DoNotOptimize(tbsynth::generate_sequence(v.document->sequences.front(), ethmac()));
  }
}
BENCHMARK(BM_DslToSystemVerilog);

void BM_ParseCoverageReport(benchmark::State& state) {
  const std::string text = slurp("coverage/ethmac_50.txt");
  for (auto _ : state) benchmark::DoNotOptimize(tbsynth::parse_report(text));
}
BENCHMARK(BM_ParseCoverageReport);

}  // namespace

BENCHMARK_MAIN();
