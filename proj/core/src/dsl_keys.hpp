#pragma once

#include <string_view>

#include "tbsynth/seq_dsl.hpp"

namespace tbsynth::dsl {

// Words that would need branching or looping semantics the DSL does not have.
bool is_control_flow_word(std::string_view key);

// Keys that would carry free-form HDL into the generated sequence.
bool is_hdl_payload_key(std::string_view key);

// Schema keys of a step type, plus the free-text keys every step may carry.
bool is_known_key(StepType type, std::string_view key);

// Keys whose values are unsigned integers (scalars or lists).
bool is_numeric_key(std::string_view key);

}  // namespace tbsynth::dsl
