#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "tbsynth/seq_dsl.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using nlohmann::json;
using tbsynth::testing::fixture;
using tbsynth::testing::load_blueprint;

namespace {

const Blueprint& uart() {
  static const Blueprint bp = load_blueprint("uart_wb.json");
  return bp;
}

json one_step(const json& step) {
  return {{"schema_version", "1"}, {"sequences", json::array({{{"name", "s"}, {"steps", json::array({step})}}})}};
}

const json& first_step(const AutoFixResult& r) { return r.document["sequences"][0]["steps"][0]; }

}  // namespace

TEST(AutoFix, HexStringOnEightBitField) {
  const auto r = auto_fix(one_step({{"type", "value_sweep"}, {"field", "word_len"}, {"values", {"0x3"}}}), uart());
  EXPECT_EQ(first_step(r)["values"][0], 3);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].rule, FixRule::kNumericString);

  const auto w = auto_fix(one_step({{"type", "register_write"}, {"addr", "0x0"}, {"value", "0xFF"}}), uart());
  EXPECT_EQ(first_step(w)["value"], 255);
}

TEST(AutoFix, DecimalAndVerilogLiterals) {
  const auto r = auto_fix(one_step({{"type", "register_write"}, {"addr", "26"}, {"value", "8'hFF"}}), uart());
  EXPECT_EQ(first_step(r)["addr"], 26);
  EXPECT_EQ(first_step(r)["value"], 255);
}

TEST(AutoFix, PollDefaults) {
  const auto r = auto_fix(one_step({{"type", "poll"}, {"addr", 0x14}, {"mask", 1}, {"expected", 1}}), uart());
  EXPECT_EQ(first_step(r)["max_iters"], 1024);
  EXPECT_EQ(first_step(r)["interval_cycles"], 1);
  const auto capped = auto_fix(
      one_step({{"type", "poll"}, {"addr", 0x14}, {"mask", 1}, {"expected", 1}, {"max_iters", 1000000}, {"interval_cycles", 2}}),
      uart());
  EXPECT_EQ(first_step(capped)["max_iters"], 65536);
}

TEST(AutoFix, AliasesRegisterNamesMasksAndUnknownKeys) {
  const auto r = auto_fix(
      one_step({{"type", "reg_write"}, {"addr", "divisor"}, {"value", 0x1ffffffffULL}, {"note", "x"}}), uart());
  const auto& s = first_step(r);
  EXPECT_EQ(s["type"], "register_write");
  EXPECT_EQ(s["addr"], 0x18);
  EXPECT_EQ(s["value"], 0xffffffffULL);
  EXPECT_FALSE(s.contains("note"));
  std::set<FixRule> rules;
  for (const auto& e : r.log) rules.insert(e.rule);
  EXPECT_TRUE(rules.count(FixRule::kStepTypeAlias));
  EXPECT_TRUE(rules.count(FixRule::kRegisterName));
  EXPECT_TRUE(rules.count(FixRule::kValueMask));
  EXPECT_TRUE(rules.count(FixRule::kDropUnknownKey));
}

TEST(AutoFix, CamelCaseAlias) {
  const auto r = auto_fix(one_step({{"type", "RegisterRead"}, {"addr", 4}}), uart());
  EXPECT_EQ(first_step(r)["type"], "register_read");
}

TEST(AutoFix, CanonicalDocumentIsAFixpoint) {
  const json doc = json::parse(fixture("dsl/ethmac_mii_read.json"));
  const auto bp = load_blueprint("ethmac_wb.json");
  const auto once = auto_fix(doc, bp);
  const auto twice = auto_fix(once.document, bp);
  EXPECT_TRUE(twice.log.empty());
  EXPECT_EQ(twice.document, once.document);
}

TEST(AutoFix, DoesNotTouchControlFlowOrHdlKeys) {
  const auto r = auto_fix(one_step({{"type", "delay"}, {"cycles", 3}, {"while", "x"}, {"code", "y"}}), uart());
  EXPECT_TRUE(first_step(r).contains("while"));
  EXPECT_TRUE(first_step(r).contains("code"));
}

TEST(AutoFix, TypoDocumentBecomesValid) {
  const auto bp = load_blueprint("ethmac_wb.json");
  const auto r = auto_fix(json::parse(fixture("dsl/typo_step.json")), bp);
  EXPECT_FALSE(r.log.empty());
  EXPECT_TRUE(validate(r.document, bp).ok());
}
