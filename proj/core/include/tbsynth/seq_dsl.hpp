#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"
#include "tbsynth/error.hpp"

namespace tbsynth {

enum class StepType {
  kRegisterWrite,
  kRegisterRead,
  kPoll,
  kRandomizeSend,
  kDelay,
  kMemoryWrite,
  kBfmAction,
  kConfigSweep,
  kValueSweep,
  kTogglePattern,
};

std::string_view to_string(StepType t);
std::optional<StepType> step_type_from_string(std::string_view s);  // canonical names only

enum class Relation { kEq, kInSet, kInRange };
std::string_view to_string(Relation r);

struct Constraint {
  std::string field;
  Relation relation = Relation::kEq;
  std::vector<std::uint64_t> operand;  // eq: 1 value, in_set: n values, in_range: {lo, hi}

  bool operator==(const Constraint&) const = default;
};

struct SweepField {
  std::string field;
  std::vector<std::uint64_t> values;

  bool operator==(const SweepField&) const = default;
};

enum class TogglePattern { kWalkingOne, kWalkingZero, kAlternating };
std::string_view to_string(TogglePattern p);

inline constexpr std::uint64_t kDefaultPollMaxIters = 1024;
inline constexpr std::uint64_t kPollMaxItersCap = 65536;

// One DSL step. Only the members of its type are meaningful.
struct DslStep {
  StepType type = StepType::kDelay;
  std::uint64_t addr = 0;             // register_write, register_read, poll
  std::uint64_t value = 0;            // register_write
  std::string store_as;               // register_read
  std::uint64_t mask = 0;             // poll
  std::uint64_t expected = 0;         // poll
  std::uint64_t max_iters = 0;        // poll
  std::uint64_t interval_cycles = 1;  // poll
  std::vector<Constraint> constraints;  // randomize_send
  std::uint64_t repeat = 1;             // randomize_send
  std::uint64_t cycles = 0;             // delay
  std::string bfm;                      // memory_write, bfm_action
  std::uint64_t base_addr = 0;          // memory_write
  std::vector<std::uint64_t> data;      // memory_write
  std::string action;                   // bfm_action
  std::map<std::string, std::uint64_t> params;  // bfm_action
  std::vector<SweepField> sweep;        // config_sweep (row-major over the list)
  std::string field;                    // value_sweep, toggle_pattern
  std::vector<std::uint64_t> values;    // value_sweep
  TogglePattern pattern = TogglePattern::kWalkingOne;

  bool operator==(const DslStep&) const = default;
};

struct DslSequence {
  std::string name;
  std::string description;
  std::vector<DslStep> steps;

  bool operator==(const DslSequence&) const = default;
};

inline constexpr const char* kDslSchemaVersion = "1";

struct DslDocument {
  std::string schema_version = kDslSchemaVersion;
  std::vector<DslSequence> sequences;

  bool operator==(const DslDocument&) const = default;
};

nlohmann::json to_json(const DslStep& s);
nlohmann::json to_json(const DslSequence& s);
nlohmann::json to_json(const DslDocument& d);
std::string serialize_dsl(const DslDocument& d);

// ---------------------------------------------------------------------------
// Validation

enum class DslErrorKind {
  kJsonSyntax,
  kSchemaViolation,
  kUnknownStepType,
  kExpressivenessExceeded,
  kUnknownField,
  kUnknownRegister,
  kRegisterAccess,
  kUnknownBfm,
  kUnknownBfmAction,
  kValueOverflow,
  kUnboundedPoll,
  kHdlPayloadRejected,
  kDuplicateSequenceName,
};

std::string_view to_string(DslErrorKind k);

struct DslError {
  DslErrorKind kind = DslErrorKind::kSchemaViolation;
  int sequence = -1;  // index in the document, -1 for document-level errors
  int step = -1;
  std::string message;

  std::string to_string() const;
};

struct ValidationResult {
  std::optional<DslDocument> document;
  std::vector<DslError> errors;

  bool ok() const { return document.has_value() && errors.empty(); }
};

// Strict: structure, step semantics against `bp`, and name uniqueness within
// the document and against `existing_names`.
ValidationResult validate(std::string_view json_text, const Blueprint& bp,
                          const std::set<std::string>& existing_names = {});
ValidationResult validate(const nlohmann::json& doc, const Blueprint& bp,
                          const std::set<std::string>& existing_names = {});
inline ValidationResult validate(const std::string& json_text, const Blueprint& bp,
                                 const std::set<std::string>& existing_names = {}) {
  return validate(std::string_view(json_text), bp, existing_names);
}
inline ValidationResult validate(const char* json_text, const Blueprint& bp,
                                 const std::set<std::string>& existing_names = {}) {
  return validate(std::string_view(json_text), bp, existing_names);
}

struct DecodedDocument {
  std::vector<DslSequence> sequences;  // structurally valid sequences, document order
  std::vector<int> source_index;       // index of each sequence in the input document
  std::vector<DslError> errors;        // sequences with structural errors are omitted
};

// Structure only: types, keys, step names, control flow and HDL payloads.
DecodedDocument decode_document(const nlohmann::json& doc);

// Semantic checks for one step. The same checker backs validate() and the
// safety filters.
std::vector<DslError> check_step(const DslStep& step, const Blueprint& bp);

// ---------------------------------------------------------------------------
// Auto-fix

enum class FixRule {
  kNumericString,    // "0x1F", "8'hFF", "12" -> integer
  kRegisterName,     // register name in an address slot -> its address
  kStepTypeAlias,    // "reg_write", "RegisterWrite", ... -> canonical
  kPollMaxIters,     // missing max_iters -> 1024, cap 65536
  kPollInterval,     // missing interval_cycles -> 1
  kValueMask,        // out-of-width value -> masked to width
  kDropUnknownKey,   // unknown optional key removed
};

std::string_view to_string(FixRule r);

struct FixEntry {
  int sequence = -1;
  int step = -1;
  FixRule rule = FixRule::kNumericString;
  std::string before;
  std::string after;
};

using FixLog = std::vector<FixEntry>;

struct AutoFixResult {
  nlohmann::json document;
  FixLog log;
};

// Deterministic and idempotent: auto_fix(auto_fix(x).document) logs nothing.
AutoFixResult auto_fix(const nlohmann::json& doc, const Blueprint& bp);

// ---------------------------------------------------------------------------
// Safety filters

struct FilterEntry {
  int step = -1;
  std::string action;  // "dropped_constraint" or "rejected_step"
  std::string reason;
};

using FilterLog = std::vector<FilterEntry>;

struct FilterResult {
  std::optional<DslSequence> sequence;  // empty when every step was rejected
  FilterLog log;
  bool rejected = false;
};

// Drops constraints on from_dut or fixed fields; rejects steps that fail the
// semantic check (missing signals, handshake/clock/reset ports, ...).
FilterResult apply_safety_filters(const DslSequence& seq, const Blueprint& bp);

// ---------------------------------------------------------------------------
// Stimulus expansion and code generation

std::vector<std::uint64_t> toggle_values(TogglePattern p, int width);

// Cartesian product, first field slowest.
std::vector<std::vector<std::uint64_t>> expand_config_sweep(const std::vector<SweepField>& fields);

// Transactions a step issues (randomize_send counts its single site).
std::uint64_t transaction_count(const DslStep& step, const Blueprint& bp);

class UnresolvedSignal : public Error {
 public:
  using Error::Error;
};

// One `class <name> extends <design>_base_seq` per sequence. Expects a
// sequence that passed validate() and the safety filters.
std::string generate_sequence(const DslSequence& seq, const Blueprint& bp);

// A complete sequence package file with a registry hook per sequence.
std::string generate_sequence_package(const std::vector<DslSequence>& seqs, const Blueprint& bp,
                                      int iteration);
std::string sequence_package_file_name(int iteration);

}  // namespace tbsynth
