#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"
#include "tbsynth/strategy.hpp"
#include "tbsynth/template_engine.hpp"

namespace tbsynth {

enum class ComponentKind { kDriver, kMonitor, kScoreboard, kSubscriber, kSeqItem, kBfm, kTop, kSequencePkg };

std::string_view to_string(ComponentKind k);
std::optional<ComponentKind> component_kind_from_string(std::string_view s);

// Everything but seq_item and sequence_pkg belongs to the protected set.
constexpr bool is_protected_kind(ComponentKind k) {
  return k != ComponentKind::kSeqItem && k != ComponentKind::kSequencePkg;
}

struct RenderedComponent {
  ComponentKind kind = ComponentKind::kDriver;
  std::string file_name;
  std::string content;
  bool is_protected = true;

  bool operator==(const RenderedComponent&) const = default;
};

class ProtocolMismatch : public Error {
 public:
  using Error::Error;
};

// A BFM connection that does not fit the BFM template's port list.
class BfmPortMismatch : public Error {
 public:
  using Error::Error;
};

struct BfmPortSpec {
  std::string name;
  PortDirection direction = PortDirection::kInput;
  std::string width;  // integer literal or parameter name
};

struct BfmActionSpec {
  std::string name;
  std::vector<std::string> params;
};

struct BfmSmokeAction {
  std::string action;
  std::map<std::string, std::uint64_t> params;
};

// Contract declared in a BFM template header.
struct BfmTemplateInfo {
  BfmKind kind = BfmKind::kGpio;
  std::vector<BfmPortSpec> ports;
  std::map<std::string, int> params;  // name -> default
  std::vector<BfmActionSpec> actions;
  std::vector<BfmSmokeAction> smoke;
  bool has_memory = false;

  const BfmActionSpec* find_action(std::string_view name) const;
  const BfmPortSpec* find_port(std::string_view name) const;
};

struct EmbeddedTemplate {
  const char* file_name;
  const char* source;
};

namespace detail {
const std::vector<EmbeddedTemplate>& embedded_templates();
}

class TemplateLibrary {
 public:
  // Templates compiled into the library from core/templates.
  static const TemplateLibrary& builtin();
  static TemplateLibrary load_directory(const std::filesystem::path& dir);
  static TemplateLibrary from_sources(const std::vector<std::pair<std::string, std::string>>& sources);

  // Exact scope match first, then protocol_agnostic.
  const Template* find(ComponentKind kind, const ProtocolSpec& protocol) const;
  const Template* find_bfm(BfmKind kind) const;
  const BfmTemplateInfo* bfm_info(BfmKind kind) const;
  const std::vector<Template>& templates() const { return templates_; }

 private:
  std::vector<Template> templates_;
  std::map<BfmKind, BfmTemplateInfo> bfm_info_;
};

// Slot values for `bp`. `bfm` selects the BFM instance for a BFM template.
nlohmann::json build_render_context(const Blueprint& bp, const StrategyMap& strategies,
                                    const TemplateLibrary& library = TemplateLibrary::builtin());

std::string component_file_name(ComponentKind kind, const Blueprint& bp, const BfmDecl* bfm = nullptr);

// "<design>_sequences.svh": the include list of sequence package files that
// the top file pulls in. Written by the pipeline, not a template.
std::string sequences_include_file_name(const Blueprint& bp);

RenderedComponent render(const Template& tpl, const Blueprint& bp, const StrategyMap& strategies,
                         const BfmDecl* bfm = nullptr,
                         const TemplateLibrary& library = TemplateLibrary::builtin());

// Refuses (BlueprintRejected) when consistency_check fails. Output order:
// seq_item, driver, monitor, scoreboard, subscriber, one BFM per declaration, top.
std::vector<RenderedComponent> render_all(const Blueprint& bp, const StrategyMap& strategies,
                                          const TemplateLibrary& library = TemplateLibrary::builtin());

struct CoverBinPlan {
  std::string name;
  std::string spec;  // SystemVerilog bin body, e.g. "{[8'h0:8'hf]}"
};

// 2^w value bins for w <= 4, else 16 equal ranges.
std::vector<CoverBinPlan> auto_bins(int width);
inline constexpr int kAutoRangeBins = 16;

// Subscriber component text: one covergroup with one coverpoint per field.
std::string generate_covergroups(const Blueprint& bp, const StrategyMap& strategies = {},
                                 const TemplateLibrary& library = TemplateLibrary::builtin());

}  // namespace tbsynth
