#include "tbsynth/strategy.hpp"

namespace tbsynth {

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kEnumerate: return "enumerate";
    case StrategyKind::kCrv: return "crv";
    case StrategyKind::kFixed: return "fixed";
  }
  return "?";
}

StimulusStrategy infer_strategy(const SeqItemField& field) {
  StimulusStrategy s;
  if (field.role == FieldRole::kConfig && field.default_value) {
    s.kind = StrategyKind::kFixed;
    s.fixed_value = *field.default_value;
    return s;
  }
  if (field.width <= kEnumerateMaxWidth) {
    s.kind = StrategyKind::kEnumerate;
    const std::uint64_t n = std::uint64_t{1} << field.width;
    s.values.reserve(n);
    for (std::uint64_t v = 0; v < n; ++v) s.values.push_back(v);
    return s;
  }
  s.kind = StrategyKind::kCrv;
  return s;
}

StrategyMap infer_all(const Blueprint& bp) {
  StrategyMap out;
  for (const auto& f : bp.seq_item_fields) {
    if (f.direction == FieldDirection::kToDut) out.emplace(f.name, infer_strategy(f));
  }
  return out;
}

nlohmann::json to_json(const StrategyMap& strategies) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, s] : strategies) {
    nlohmann::json o = {{"kind", std::string(to_string(s.kind))}};
    if (s.kind == StrategyKind::kEnumerate) o["values"] = s.values;
    if (s.kind == StrategyKind::kFixed) o["value"] = s.fixed_value;
    j[name] = o;
  }
  return j;
}

}  // namespace tbsynth
