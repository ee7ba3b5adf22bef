#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"

namespace tbsynth {

enum class StrategyKind { kEnumerate, kCrv, kFixed };
std::string_view to_string(StrategyKind k);

struct StimulusStrategy {
  StrategyKind kind = StrategyKind::kCrv;
  std::vector<std::uint64_t> values;  // kEnumerate: 0..2^w-1 ascending
  std::uint64_t fixed_value = 0;      // kFixed

  bool operator==(const StimulusStrategy&) const = default;
};

// Widest field swept exhaustively.
inline constexpr int kEnumerateMaxWidth = 4;

// config + default -> fixed; else width <= 4 -> enumerate; else crv.
StimulusStrategy infer_strategy(const SeqItemField& field);

using StrategyMap = std::map<std::string, StimulusStrategy>;

// Strategies for every to_dut field; from_dut fields are never stimulus targets.
StrategyMap infer_all(const Blueprint& bp);

nlohmann::json to_json(const StrategyMap& strategies);

}  // namespace tbsynth
