#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/seq_dsl.hpp"

namespace tbsynth::testing {

// auto_fix, decode, then the safety filters, as the pipeline applies them.
struct FilteredDocument {
  FixLog fixes;
  std::vector<DslError> decode_errors;
  std::vector<DslSequence> accepted;
  int dropped = 0;
  int rejected = 0;
};

inline FilteredDocument filter_document(const nlohmann::json& doc, const Blueprint& bp) {
  FilteredDocument out;
  auto fixed = auto_fix(doc, bp);
  out.fixes = fixed.log;
  auto decoded = decode_document(fixed.document);
  out.decode_errors = decoded.errors;
  for (const auto& seq : decoded.sequences) {
    auto r = apply_safety_filters(seq, bp);
    for (const auto& e : r.log) {
      if (e.action == "dropped_constraint") ++out.dropped;
      if (e.action == "rejected_step") ++out.rejected;
    }
    if (r.sequence) out.accepted.push_back(*r.sequence);
  }
  return out;
}

// Empty when the outcome matches `expect`, otherwise a description.
inline std::string check_corpus_case(const nlohmann::json& c, const Blueprint& bp) {
  const auto got = filter_document(c.at("document"), bp);
  const auto& e = c.at("expect");
  std::size_t steps = 0;
  for (const auto& s : got.accepted) steps += s.steps.size();
  std::vector<std::string> kinds;
  for (const auto& d : got.decode_errors) kinds.emplace_back(to_string(d.kind));
  std::string diff;
  auto cmp = [&](const char* what, std::size_t have, std::size_t want) {
    if (have != want) diff += std::string(what) + " " + std::to_string(have) + " != " + std::to_string(want) + "; ";
  };
  cmp("sequences", got.accepted.size(), e.at("sequences").get<std::size_t>());
  cmp("steps", steps, e.at("steps").get<std::size_t>());
  cmp("dropped", static_cast<std::size_t>(got.dropped), e.at("dropped").get<std::size_t>());
  cmp("rejected", static_cast<std::size_t>(got.rejected), e.at("rejected").get<std::size_t>());
  if (kinds != e.at("decode_errors").get<std::vector<std::string>>()) {
    diff += "decode errors " + nlohmann::json(kinds).dump() + " != " + e.at("decode_errors").dump();
  }
  return diff;
}

}  // namespace tbsynth::testing
