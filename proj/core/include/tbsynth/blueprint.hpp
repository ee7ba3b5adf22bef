#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/error.hpp"

namespace tbsynth {

enum class Protocol { kDirect, kWishbone, kAxi4Lite };
enum class HandshakeVariant { kReadyDone, kValidReady, kBusy, kStreaming };

struct ProtocolSpec {
  Protocol type = Protocol::kDirect;
  // Only meaningful for Protocol::kDirect.
  HandshakeVariant variant = HandshakeVariant::kReadyDone;

  bool is_bus() const { return type != Protocol::kDirect; }
  bool operator==(const ProtocolSpec& o) const {
    return type == o.type && (type != Protocol::kDirect || variant == o.variant);
  }
};

// "wishbone", "axi4lite", "direct_ready_done", ... Used as template scope names.
std::string protocol_scope_name(const ProtocolSpec& p);
std::string_view to_string(Protocol p);
std::string_view to_string(HandshakeVariant v);

enum class PortDirection { kInput, kOutput, kInout };
enum class PortClass { kClock, kReset, kPad, kBusHandshake, kStimulus };

std::string_view to_string(PortDirection d);
std::string_view to_string(PortClass c);

struct PortDecl {
  std::string name;
  int width = 1;
  PortDirection direction = PortDirection::kInput;
  PortClass port_class = PortClass::kStimulus;

  bool operator==(const PortDecl&) const = default;
};

enum class FieldDirection { kToDut, kFromDut };
enum class FieldRole { kData, kConfig, kControl, kStatus };

std::string_view to_string(FieldDirection d);
std::string_view to_string(FieldRole r);

enum class CoverBinKind { kValue, kRange, kAutoWidth };

struct CoverBin {
  std::string name;
  CoverBinKind kind = CoverBinKind::kAutoWidth;
  std::uint64_t lo = 0;  // kValue stores its value in lo
  std::uint64_t hi = 0;

  bool operator==(const CoverBin&) const = default;
};

struct SeqItemField {
  std::string name;
  int width = 1;
  FieldDirection direction = FieldDirection::kToDut;
  FieldRole role = FieldRole::kData;
  std::optional<std::uint64_t> default_value;
  std::optional<std::vector<CoverBin>> cover_bins;

  bool operator==(const SeqItemField&) const = default;
};

enum class RegisterAccess { kReadWrite, kReadOnly, kWriteOnly };
std::string_view to_string(RegisterAccess a);

struct RegisterField {
  std::string name;
  int lsb = 0;
  int msb = 0;
  std::optional<std::uint64_t> default_value;

  int width() const { return msb - lsb + 1; }
  bool operator==(const RegisterField&) const = default;
};

struct RegisterDecl {
  std::string name;
  std::uint64_t address = 0;
  int width = 32;
  RegisterAccess access = RegisterAccess::kReadWrite;
  std::vector<RegisterField> fields;

  bool writable() const { return access != RegisterAccess::kReadOnly; }
  bool readable() const { return access != RegisterAccess::kWriteOnly; }
  bool operator==(const RegisterDecl&) const = default;
};

enum class BfmKind { kGpio, kI2cSlave, kMiiPhy, kSdramModel, kSpiSlave, kUartSerial, kWishboneSlave };
std::string_view to_string(BfmKind k);
std::optional<BfmKind> bfm_kind_from_string(std::string_view s);
const std::vector<BfmKind>& all_bfm_kinds();

struct BfmDecl {
  BfmKind kind = BfmKind::kGpio;
  std::string instance_name;
  std::map<std::string, std::string> connections;  // BFM port -> DUT port

  bool operator==(const BfmDecl&) const = default;
};

struct AgentSpec {
  std::string name;
  bool active = true;

  bool operator==(const AgentSpec&) const = default;
};

// A cover declaration that targets a seq_item field by name.
struct CoverDecl {
  std::string field;
  std::vector<CoverBin> bins;

  bool operator==(const CoverDecl&) const = default;
};

struct ResetSpec {
  std::string name;
  bool active_high = true;

  bool operator==(const ResetSpec&) const = default;
};

inline constexpr int kBlueprintSchemaVersion = 1;
inline constexpr int kDefaultAckTimeout = 1024;

struct Blueprint {
  int schema_version = kBlueprintSchemaVersion;
  std::string design_name;
  ProtocolSpec protocol;
  std::string clock;
  ResetSpec reset;
  std::vector<AgentSpec> agents;
  std::vector<PortDecl> ports;
  std::vector<SeqItemField> seq_item_fields;
  std::vector<RegisterDecl> registers;
  std::vector<BfmDecl> bfms;
  std::vector<CoverDecl> coverpoints;
  std::optional<int> ack_timeout;

  const PortDecl* find_port(std::string_view name) const;
  const SeqItemField* find_field(std::string_view name) const;
  const RegisterDecl* find_register(std::string_view name) const;
  const RegisterDecl* find_register_at(std::uint64_t address) const;
  const BfmDecl* find_bfm(std::string_view instance_name) const;
  int effective_ack_timeout() const { return ack_timeout.value_or(kDefaultAckTimeout); }

  bool operator==(const Blueprint&) const = default;
};

// ---------------------------------------------------------------------------
// Port classification

// Glob lexicons deciding which ports are never stimulus. Handshake globs are
// matched against each '_'-separated token of a port name and are keyed by
// protocol scope name.
struct ClassifierLexicon {
  std::vector<std::string> clock;
  std::vector<std::string> reset;
  std::vector<std::string> pad;
  std::map<std::string, std::vector<std::string>> handshake;
};

const ClassifierLexicon& default_lexicon();

// Priority: clock > reset > bus_handshake > pad > stimulus.
PortClass classify_port(std::string_view name, const ProtocolSpec& protocol,
                        const ClassifierLexicon& lexicon = default_lexicon());
std::vector<PortDecl> classify_ports(std::vector<PortDecl> ports, const ProtocolSpec& protocol,
                                     const ClassifierLexicon& lexicon = default_lexicon());

// ---------------------------------------------------------------------------
// Bus roles

// Resolved protocol signals, role name -> DUT port. Role names per protocol:
//   wishbone: adr dat_w dat_r we sel cyc stb ack err rty
//   axi4lite: awaddr awprot awvalid awready wdata wstrb wvalid wready bresp bvalid
//             bready araddr arprot arvalid arready rdata rresp rvalid rready
//   direct:   start ready done valid busy last (subset per variant)
using BusRoles = std::map<std::string, std::string>;

BusRoles resolve_bus_roles(const Blueprint& bp);
const std::vector<std::string>& required_bus_roles(const ProtocolSpec& protocol);
int bus_data_width(const Blueprint& bp);

// ---------------------------------------------------------------------------
// Parsing

enum class BlueprintErrorKind { kJsonSyntax, kSchemaViolation, kInvariantViolation };

struct BlueprintError {
  BlueprintErrorKind kind = BlueprintErrorKind::kSchemaViolation;
  std::string path;
  std::string expected;
  std::string found;
  std::string description;

  std::string to_string() const;
};

struct BlueprintParseResult {
  std::optional<Blueprint> blueprint;
  std::vector<BlueprintError> errors;

  bool ok() const { return blueprint.has_value() && errors.empty(); }
};

BlueprintParseResult parse_blueprint(std::string_view json_text,
                                     const ClassifierLexicon& lexicon = default_lexicon());
BlueprintParseResult blueprint_from_json(const nlohmann::json& doc,
                                         const ClassifierLexicon& lexicon = default_lexicon());

// Type invariants only; parse_blueprint calls this after schema decoding.
std::vector<BlueprintError> check_invariants(const Blueprint& bp);

nlohmann::json to_json(const Blueprint& bp);
std::string serialize_blueprint(const Blueprint& bp);

// ---------------------------------------------------------------------------
// Three-layer consistency check

enum class ConsistencyIssueKind { kWidthMismatch, kPhantomSignal, kPhantomCoverpoint };
enum class ConsistencyLayer { kTransaction, kMonitor, kCoverage };

struct ConsistencyIssue {
  ConsistencyIssueKind kind;
  ConsistencyLayer layer;
  std::string name;
  int expected = 0;
  int found = 0;

  std::string to_string() const;
  bool operator==(const ConsistencyIssue&) const = default;
};

struct ConsistencyReport {
  std::vector<ConsistencyIssue> issues;
  bool passed() const { return issues.empty(); }
};

struct MonitorSignal {
  std::string signal;
  int expected_width = 1;
  std::string source;  // bus role or field name
};

// Signals the monitor template samples, with the widths it expects.
std::vector<MonitorSignal> monitor_map(const Blueprint& bp);

ConsistencyReport consistency_check(const Blueprint& bp);

class BlueprintRejected : public Error {
 public:
  explicit BlueprintRejected(std::vector<std::string> reasons);
  const std::vector<std::string>& reasons() const noexcept { return reasons_; }

 private:
  std::vector<std::string> reasons_;
};

}  // namespace tbsynth
