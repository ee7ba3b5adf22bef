#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "tbsynth/seq_dsl.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using nlohmann::json;
using tbsynth::testing::fixture;
using tbsynth::testing::load_blueprint;

namespace {

const Blueprint& ethmac() {
  static const Blueprint bp = load_blueprint("ethmac_wb.json");
  return bp;
}

const Blueprint& sdram() {
  static const Blueprint bp = load_blueprint("sdram_wb.json");
  return bp;
}

json one_step(const json& step) {
  return {{"schema_version", "1"}, {"sequences", json::array({{{"name", "s"}, {"steps", json::array({step})}}})}};
}

bool has(const std::vector<DslError>& errors, DslErrorKind k) {
  return std::any_of(errors.begin(), errors.end(), [&](const DslError& e) { return e.kind == k; });
}

const char* kStepTypes[] = {"register_write", "register_read", "poll",         "randomize_send", "delay",
                            "memory_write",   "bfm_action",    "config_sweep", "value_sweep",    "toggle_pattern"};

}  // namespace

TEST(SeqDsl, ExactlyTenCanonicalStepTypes) {
  std::set<std::string> names;
  for (int i = 0; i < 10; ++i) names.insert(std::string(to_string(static_cast<StepType>(i))));
  EXPECT_EQ(names, std::set<std::string>(std::begin(kStepTypes), std::end(kStepTypes)));
  for (const char* n : kStepTypes) EXPECT_TRUE(step_type_from_string(n).has_value()) << n;
  EXPECT_FALSE(step_type_from_string("reg_write").has_value());
  EXPECT_FALSE(step_type_from_string("inject_fault").has_value());
}

TEST(SeqDsl, EveryStepTypeFixtureValidates) {
  for (const char* n : kStepTypes) {
    SCOPED_TRACE(n);
    const auto r = validate(auto_fix(json::parse(fixture(std::string("dsl/steps/") + n + ".json")), sdram()).document,
                            sdram());
    ASSERT_TRUE(r.ok()) << (r.errors.empty() ? "" : r.errors.front().to_string());
    ASSERT_EQ(r.document->sequences.size(), 1u);
    EXPECT_EQ(to_string(r.document->sequences[0].steps[0].type), n);
  }
}

TEST(SeqDsl, InventedEleventhTypeIsRejected) {
  const auto r = validate(one_step({{"type", "inject_fault"}, {"target", "x"}}), ethmac());
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r.errors, DslErrorKind::kUnknownStepType));
}

TEST(SeqDsl, MiiReadDocumentValidates) {
  const auto r = validate(auto_fix(json::parse(fixture("dsl/ethmac_mii_read.json")), ethmac()).document, ethmac());
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.document->sequences.size(), 1u);
  const auto& steps = r.document->sequences[0].steps;
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[0].type, StepType::kRegisterWrite);
  EXPECT_EQ(steps[0].addr, 0x2cu);
  EXPECT_EQ(steps[1].type, StepType::kPoll);
  EXPECT_EQ(steps[1].max_iters, 100u);
}

TEST(SeqDsl, TypoStepTypeBeforeAutoFix) {
  const auto r = validate(one_step({{"type", "regwrite"}, {"addr", 0}, {"value", 1}}), ethmac());
  EXPECT_TRUE(has(r.errors, DslErrorKind::kUnknownStepType));
}

TEST(SeqDsl, PollWithoutBoundBeforeAutoFix) {
  const auto r = validate(one_step({{"type", "poll"}, {"addr", 0x3c}, {"mask", 2}, {"expected", 0}}), ethmac());
  EXPECT_TRUE(has(r.errors, DslErrorKind::kUnboundedPoll));
}

TEST(SeqDsl, ControlFlowAndHdlPayloadsAreRejected) {
  EXPECT_TRUE(has(validate(one_step({{"type", "while"}, {"condition", "x"}}), ethmac()).errors,
                  DslErrorKind::kExpressivenessExceeded));
  EXPECT_TRUE(has(validate(one_step({{"type", "delay"}, {"cycles", 2}, {"if", "x"}}), ethmac()).errors,
                  DslErrorKind::kExpressivenessExceeded));
  EXPECT_TRUE(has(validate(one_step({{"type", "delay"}, {"cycles", 2}, {"sv", "#10;"}}), ethmac()).errors,
                  DslErrorKind::kHdlPayloadRejected));
}

TEST(SeqDsl, SemanticErrors) {
  EXPECT_TRUE(has(validate(one_step({{"type", "register_write"}, {"addr", 0x99}, {"value", 1}}), ethmac()).errors,
                  DslErrorKind::kUnknownRegister));
  EXPECT_TRUE(has(validate(one_step({{"type", "register_write"}, {"addr", 0x3c}, {"value", 1}}), ethmac()).errors,
                  DslErrorKind::kRegisterAccess));
  EXPECT_TRUE(has(validate(one_step({{"type", "value_sweep"}, {"field", "nope"}, {"values", {1}}}), ethmac()).errors,
                  DslErrorKind::kUnknownField));
  EXPECT_TRUE(has(validate(one_step({{"type", "bfm_action"}, {"bfm", "phy9"}, {"action", "link_up"}}), ethmac()).errors,
                  DslErrorKind::kUnknownBfm));
  EXPECT_TRUE(has(validate(one_step({{"type", "bfm_action"}, {"bfm", "phy0"}, {"action", "dance"}}), ethmac()).errors,
                  DslErrorKind::kUnknownBfmAction));
  EXPECT_TRUE(
      has(validate(one_step({{"type", "register_write"}, {"addr", 0}, {"value", 0x1ffffffffULL}}), ethmac()).errors,
          DslErrorKind::kValueOverflow));
}

TEST(SeqDsl, DuplicateNamesInDocumentAndAgainstExisting) {
  json doc = one_step({{"type", "delay"}, {"cycles", 3}});
  doc["sequences"].push_back(doc["sequences"][0]);
  EXPECT_TRUE(has(validate(doc, ethmac()).errors, DslErrorKind::kDuplicateSequenceName));
  EXPECT_TRUE(has(validate(one_step({{"type", "delay"}, {"cycles", 3}}), ethmac(), {"s"}).errors,
                  DslErrorKind::kDuplicateSequenceName));
}

TEST(SeqDsl, JsonSyntaxError) {
  const auto r = validate(std::string_view("{\"sequences\": ["), ethmac());
  EXPECT_TRUE(has(r.errors, DslErrorKind::kJsonSyntax));
}

TEST(SeqDsl, DecodeKeepsGoodSequencesAndIndexesErrors) {
  json doc = json::parse(fixture("dsl/ethmac_mii_read.json"));
  const json bad = {{"name", "bad"}, {"steps", json::array({{{"type", "goto"}, {"label", "x"}}})}};
  doc["sequences"].insert(doc["sequences"].begin(), bad);
  const auto d = decode_document(auto_fix(doc, ethmac()).document);
  ASSERT_EQ(d.sequences.size(), 1u);
  EXPECT_EQ(d.sequences[0].name, "mii_read_status");
  ASSERT_EQ(d.source_index.size(), 1u);
  EXPECT_EQ(d.source_index[0], 1);
  ASSERT_EQ(d.errors.size(), 1u);
  EXPECT_EQ(d.errors[0].sequence, 0);
  EXPECT_EQ(d.errors[0].step, 0);
}

TEST(SeqDsl, SerializationRoundTrips) {
  for (const char* n : kStepTypes) {
    SCOPED_TRACE(n);
    const auto r = validate(auto_fix(json::parse(fixture(std::string("dsl/steps/") + n + ".json")), sdram()).document,
                            sdram());
    ASSERT_TRUE(r.ok());
    const auto again = validate(serialize_dsl(*r.document), sdram());
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(*again.document, *r.document);
  }
}
