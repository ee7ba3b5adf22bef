#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"
#include "tbsynth/error.hpp"
#include "tbsynth/seq_dsl.hpp"

namespace tbsynth {

// ---------------------------------------------------------------------------
// Gap records

struct LineMiss {
  std::string file;
  int line = 0;
  bool operator==(const LineMiss&) const = default;
};

struct ConditionMiss {
  std::string file;
  int line = 0;
  std::string term;
  bool operator==(const ConditionMiss&) const = default;
};

enum class ToggleDirection { kRiseMissed, kFallMissed };

struct ToggleMiss {
  std::string signal;
  ToggleDirection direction = ToggleDirection::kRiseMissed;
  bool operator==(const ToggleMiss&) const = default;
};

struct BranchMiss {
  std::string file;
  int line = 0;
  std::string branch;
  bool operator==(const BranchMiss&) const = default;
};

struct FsmStateMiss {
  std::string fsm;
  std::string state;
  bool operator==(const FsmStateMiss&) const = default;
};

struct FsmTransitionMiss {
  std::string fsm;
  std::string from;
  std::string to;
  bool operator==(const FsmTransitionMiss&) const = default;
};

struct FuncBinMiss {
  std::string covergroup;
  std::string coverpoint;
  std::string bin;
  bool operator==(const FuncBinMiss&) const = default;
};

using GapRecord =
    std::variant<LineMiss, ConditionMiss, ToggleMiss, BranchMiss, FsmStateMiss, FsmTransitionMiss, FuncBinMiss>;

struct CoverageGap {
  GapRecord record;
  std::string note;  // free text after " -- ", may be empty

  // Stable across parses, e.g. "FSM_TRANSITION:ctrl_fsm:IDLE->TX".
  std::string identity() const;
  // Canonical report line, e.g. "GAP FSM ctrl_fsm MISSING-TRANSITION IDLE->TX".
  std::string to_line() const;
  // One plain-text sentence for prompts.
  std::string describe() const;

  bool operator==(const CoverageGap&) const = default;
};

// ---------------------------------------------------------------------------
// Metrics

enum class Metric { kLine, kCondition, kToggle, kBranch, kFsmState, kFsmTransition, kGroup };
inline constexpr std::size_t kMetricCount = 7;

std::string_view to_string(Metric m);
std::optional<Metric> metric_from_string(std::string_view s);
const std::array<Metric, kMetricCount>& all_metrics();

// Which metric a gap counts against.
Metric gap_metric(const CoverageGap& g);

struct MetricValue {
  std::uint64_t covered = 0;
  std::uint64_t total = 0;

  double percent() const { return total == 0 ? 100.0 : 100.0 * static_cast<double>(covered) / static_cast<double>(total); }
  bool operator==(const MetricValue&) const = default;
};

class MissingMetric : public Error {
 public:
  explicit MissingMetric(std::string_view name)
      : Error("coverage metric '" + std::string(name) + "' is missing"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

struct CoverageSummary {
  std::array<std::optional<MetricValue>, kMetricCount> metrics{};

  const std::optional<MetricValue>& get(Metric m) const { return metrics[static_cast<std::size_t>(m)]; }
  void set(Metric m, MetricValue v) { metrics[static_cast<std::size_t>(m)] = v; }
  double percent(Metric m) const;  // throws MissingMetric

  double code_coverage() const;        // throws MissingMetric
  double functional_coverage() const;  // throws MissingMetric

  bool operator==(const CoverageSummary&) const = default;
};

// Unweighted mean of line, condition, toggle, branch and the FSM family
// (state and transition averaged first). Never reads the group metric.
double compute_code_coverage(const CoverageSummary& s);
double compute_functional_coverage(const CoverageSummary& s);

// ---------------------------------------------------------------------------
// Canonical report format
//
//   HAVENCOV v1
//   METRIC <name> <covered> <total>
//   GAP LINE <file> <line>
//   GAP COND <file> <line> <term>
//   GAP TOGGLE <signal> RISE-MISSED|FALL-MISSED
//   GAP BRANCH <file> <line> <branch>
//   GAP FSM <fsm> MISSING-STATE <state>
//   GAP FSM <fsm> MISSING-TRANSITION <from>-><to>
//   GAP FUNC <covergroup>.<coverpoint> MISSING-BIN <bin>
//
// Any gap line may end in " -- <note>". The "GAP " prefix is optional on
// input. '#' starts a comment line.

inline constexpr std::string_view kReportMagic = "HAVENCOV v1";

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

struct CoverageReport {
  CoverageSummary summary;
  std::vector<CoverageGap> gaps;
  std::vector<std::string> warnings;  // malformed lines, "line N: text"
};

CoverageReport parse_report(std::string_view text);  // throws UnsupportedFormat
std::optional<CoverageGap> parse_gap_line(std::string_view line);
std::string serialize_report(const CoverageSummary& summary, const std::vector<CoverageGap>& gaps);

nlohmann::json to_json(const CoverageSummary& s);

// ---------------------------------------------------------------------------
// Loop control and prompts

inline constexpr double kDefaultConvergenceThreshold = 0.1;

// True when both code and functional coverage improved by less than
// `threshold` percentage points.
bool converged(const CoverageSummary& prev, const CoverageSummary& curr,
               double threshold = kDefaultConvergenceThreshold);

// The JSON instruction block that tells the model what a DSL document is.
std::string dsl_schema_instructions();

std::string render_gap_prompt(const std::vector<CoverageGap>& gaps, const std::vector<DslSequence>& existing,
                              const Blueprint& bp, std::string_view protocol_flows);

}  // namespace tbsynth
