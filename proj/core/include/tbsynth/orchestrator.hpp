#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"
#include "tbsynth/coverage.hpp"
#include "tbsynth/error.hpp"
#include "tbsynth/llm_client.hpp"
#include "tbsynth/predefined_seqs.hpp"
#include "tbsynth/seq_dsl.hpp"
#include "tbsynth/simulator.hpp"
#include "tbsynth/strategy.hpp"
#include "tbsynth/templates.hpp"

namespace tbsynth {

class CompileFixExhausted : public Error {
 public:
  CompileFixExhausted(int iterations, std::string last_log);
  int iterations() const noexcept { return iterations_; }
  const std::string& last_log() const noexcept { return last_log_; }

 private:
  int iterations_;
  std::string last_log_;
};

struct RunConfig {
  int k = 3;
  int max_fix_iterations = 5;
  double convergence_threshold = kDefaultConvergenceThreshold;
  // Empty: keep everything in memory.
  std::filesystem::path out_dir;
  PredefinedOptions predefined;
  // Extra protocol notes appended to the generated flow description.
  std::string protocol_notes;
  // Timestamp source for run_log.jsonl. Defaults to UTC wall-clock time.
  std::function<std::string()> clock;
};

struct RunEvent {
  std::string ts;
  std::string step;
  std::string event;
  nlohmann::json detail = nlohmann::json::object();
};

nlohmann::json to_json(const RunEvent& e);

struct PipelineState {
  Blueprint blueprint;
  StrategyMap strategies;
  // Rendered testbench plus generated sequence packages and the include list.
  std::vector<RenderedComponent> components;
  // Append-only: predefined first, then each Stage-2 iteration's accepted sequences.
  std::vector<DslSequence> sequences;
  std::size_t predefined_count = 0;
  TriggerReport triggers;
  std::vector<CoverageSummary> history;
  std::string last_report;
  int iteration = 0;        // completed Stage-2 iterations
  int fix_iterations = 0;   // propose_fix rounds across the whole run
  int blueprint_retries = 0;
  std::vector<RunEvent> events;

  const RenderedComponent* find_component(std::string_view file_name) const;
  // Compilation order: top file first, then the rest in component order.
  FileSet file_set() const;
};

// Text that describes the bus transactions of the Blueprint's protocol.
std::string protocol_flows(const Blueprint& bp);

class Orchestrator {
 public:
  Orchestrator(RunConfig config, LlmClient& llm, SimulatorBackend& sim);

  // Blueprint extraction, strategies, rendering, predefined sequences,
  // compile-fix and the first simulation.
  PipelineState run_stage1(std::string_view spec_text);
  // Same, starting from an already parsed Blueprint (no extraction call).
  PipelineState run_stage1(const Blueprint& bp);

  void compile_fix_loop(PipelineState& state);
  void run_stage2(PipelineState& state);

  PipelineState run(std::string_view spec_text);

  const RunConfig& config() const { return config_; }

 private:
  Blueprint extract_blueprint(PipelineState& state, std::string_view spec_text);
  void stage1_from_blueprint(PipelineState& state);
  bool stage2_iteration(PipelineState& state, int i);
  void simulate(PipelineState& state, int iteration);
  void refresh_sequences_include(PipelineState& state);
  void apply_edits(PipelineState& state, const std::vector<FileEdit>& edits);

  void log(PipelineState& state, std::string step, std::string event, nlohmann::json detail = nlohmann::json::object());
  void write_artifact(const std::filesystem::path& rel, std::string_view content) const;
  void persist_components(const PipelineState& state) const;
  void persist_ledger() const;

  RunConfig config_;
  LlmClient& llm_;
  SimulatorBackend& sim_;
};

}  // namespace tbsynth
