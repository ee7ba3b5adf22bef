#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tbsynth/blueprint.hpp"

namespace tbsynth {

enum class LintRule {
  kNonBlockingDrive,  // DUT-facing and clocked assignments must be non-blocking
  kSignalExists,      // every vif.<signal> names a Blueprint port
  kBoundedLoop,       // while/do-while carry an explicit bound; no wait(); forever only where allowed
  kBalancedBlocks,    // begin/end, fork/join, class/endclass, ... pair up
};

std::string_view to_string(LintRule r);

struct LintViolation {
  LintRule rule;
  int line = 0;
  std::string message;

  std::string to_string() const;
};

struct RuleReport {
  std::vector<LintViolation> violations;

  bool passed() const { return violations.empty(); }
  std::size_t count(LintRule r) const;
  std::string summary() const;
};

// What the text is; decides where `forever` is legal and whether module
// outputs are checked. kAuto guesses from the text.
enum class LintTarget { kAuto, kDriver, kMonitor, kBfm, kSequence, kOther };

RuleReport check_protocol_rules(std::string_view sv_text, const Blueprint& bp,
                                LintTarget target = LintTarget::kAuto);

}  // namespace tbsynth
