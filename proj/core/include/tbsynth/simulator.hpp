#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/coverage.hpp"
#include "tbsynth/error.hpp"
#include "tbsynth/seq_dsl.hpp"

namespace tbsynth {

struct SourceFile {
  std::string name;
  std::string content;

  bool operator==(const SourceFile&) const = default;
};

// Compilation order: the first file is the root.
using FileSet = std::vector<SourceFile>;

struct CompileResult {
  bool success = false;
  std::string error_log;
};

class SimulatorError : public Error {
 public:
  using Error::Error;
};

class SimulatorBackend {
 public:
  virtual ~SimulatorBackend() = default;

  virtual CompileResult compile(const FileSet& files) = 0;
  // Runs every accumulated sequence and returns a coverage report in the
  // canonical text format.
  virtual std::string simulate(const FileSet& files, const std::vector<DslSequence>& sequences) = 0;
};

// Structural compile check shared by the mock backends: unbalanced blocks and
// `include directives that name no file in the set.
CompileResult structural_compile(const FileSet& files);

// ---------------------------------------------------------------------------
// Mock simulator driven by a DUT profile.
//
// {
//   "metrics": {"line": {"covered": 80, "total": 100}, ...},
//   "items": [
//     {"gap": "GAP FSM ctrl MISSING-STATE TX",
//      "when": {"type": "register_write", "addr": "0x0", "value": "0x2", "min_count": 1}}
//   ],
//   "compile": {"fail_first": 0, "always_fail": false, "file": "x.sv", "message": "..."}
// }
//
// Base counts cover whatever no item describes. Each item adds one to its
// metric's covered count once any sequence step matches `when` (an object
// or a list of alternatives) at least min_count times.

struct StepPattern {
  std::optional<StepType> type;
  std::optional<std::uint64_t> addr;
  std::optional<std::uint64_t> value;
  std::optional<std::string> field;
  std::vector<std::uint64_t> values;  // all must appear
  std::optional<std::string> bfm;
  std::optional<std::string> action;
  std::optional<TogglePattern> pattern;
  int min_count = 1;

  bool matches(const DslStep& step) const;
};

struct ProfileItem {
  CoverageGap gap;
  std::vector<StepPattern> when;  // any-of; empty never matches
};

struct CompileFaults {
  int fail_first = 0;
  bool always_fail = false;
  std::string file;
  std::string message = "syntax error, unexpected token";
};

struct DutProfile {
  CoverageSummary base;
  std::vector<ProfileItem> items;
  CompileFaults compile;
};

DutProfile parse_dut_profile(const nlohmann::json& doc);  // throws SimulatorError
DutProfile load_dut_profile(const std::filesystem::path& path);

class MockSimulator : public SimulatorBackend {
 public:
  explicit MockSimulator(DutProfile profile);

  CompileResult compile(const FileSet& files) override;
  std::string simulate(const FileSet& files, const std::vector<DslSequence>& sequences) override;

  int compile_calls() const { return compile_calls_; }
  int simulate_calls() const { return simulate_calls_; }
  const DutProfile& profile() const { return profile_; }

 private:
  DutProfile profile_;
  int compile_calls_ = 0;
  int simulate_calls_ = 0;
};

// Replays fixed compile results and report texts. When the queues run dry,
// compile succeeds and the last report repeats.
class ScriptedSimulator : public SimulatorBackend {
 public:
  void push_compile(CompileResult r) { compiles_.push_back(std::move(r)); }
  void push_report(std::string report) { reports_.push_back(std::move(report)); }

  CompileResult compile(const FileSet& files) override;
  std::string simulate(const FileSet& files, const std::vector<DslSequence>& sequences) override;

  int compile_calls() const { return compile_calls_; }
  int simulate_calls() const { return simulate_calls_; }

 private:
  std::deque<CompileResult> compiles_;
  std::deque<std::string> reports_;
  std::string last_report_;
  int compile_calls_ = 0;
  int simulate_calls_ = 0;
};

// Runs an external command. The files are written to `work_dir`, then
// "<command> compile <work_dir>" and "<command> simulate <work_dir>" are
// executed. A non-zero compile exit is a failed compile with the combined
// output as the log; simulate's stdout is the coverage report.
class ExternalSimulator : public SimulatorBackend {
 public:
  ExternalSimulator(std::string command, std::filesystem::path work_dir);

  CompileResult compile(const FileSet& files) override;
  std::string simulate(const FileSet& files, const std::vector<DslSequence>& sequences) override;

 private:
  void write_files(const FileSet& files) const;

  std::string command_;
  std::filesystem::path work_dir_;
};

}  // namespace tbsynth
