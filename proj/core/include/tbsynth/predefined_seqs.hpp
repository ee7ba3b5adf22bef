#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"
#include "tbsynth/seq_dsl.hpp"
#include "tbsynth/strategy.hpp"

namespace tbsynth {

enum class PredefinedKind { kCrv, kEnum, kToggle, kFifo, kBank, kBfm };

std::string_view to_string(PredefinedKind k);
const std::vector<PredefinedKind>& all_predefined_kinds();

struct TriggerResult {
  bool fired = false;
  std::vector<std::string> evidence;  // names that matched the trigger
};

struct TriggerReport {
  std::map<PredefinedKind, TriggerResult> kinds;

  const TriggerResult& at(PredefinedKind k) const { return kinds.at(k); }
  bool fired(PredefinedKind k) const { return kinds.at(k).fired; }
};

nlohmann::json to_json(const TriggerReport& r);

struct PredefinedOptions {
  // Whole name tokens that mark FIFO-facing registers.
  std::vector<std::string> fifo_tokens = {"tx", "rx", "fifo"};
  int fifo_depth = 16;
  int crv_repeat = 32;
};

// Bank layout: registers whose names differ only in one index token, with a
// constant address stride between indices and identical offsets inside
// each bank.
struct BankLayout {
  std::uint64_t stride = 0;
  std::vector<int> indices;                            // ascending
  std::vector<std::vector<const RegisterDecl*>> banks; // per index, address order
};

std::optional<BankLayout> detect_banks(const Blueprint& bp);

// Trigger predicates alone.
TriggerReport evaluate_triggers(const Blueprint& bp, const StrategyMap& strategies,
                                const PredefinedOptions& options = {});

struct PredefinedResult {
  std::vector<DslSequence> sequences;
  TriggerReport report;
};

PredefinedResult infer_predefined(const Blueprint& bp, const StrategyMap& strategies,
                                  const PredefinedOptions& options = {});

}  // namespace tbsynth
