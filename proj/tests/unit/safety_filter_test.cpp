#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "dsl_pipeline.hpp"
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

DslStep send(std::vector<Constraint> cs) {
  DslStep s;
  s.type = StepType::kRandomizeSend;
  s.constraints = std::move(cs);
  return s;
}

}  // namespace

TEST(SafetyFilter, FromDutConstraintIsDroppedAndLogged) {
  DslSequence seq{"s", "", {send({{"int_o", Relation::kEq, {1}}, {"op", Relation::kEq, {1}}})}};
  const auto r = apply_safety_filters(seq, ethmac());
  ASSERT_TRUE(r.sequence.has_value());
  ASSERT_EQ(r.sequence->steps.size(), 1u);
  ASSERT_EQ(r.sequence->steps[0].constraints.size(), 1u);
  EXPECT_EQ(r.sequence->steps[0].constraints[0].field, "op");
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].action, "dropped_constraint");
  EXPECT_NE(r.log[0].reason.find("int_o"), std::string::npos);
  EXPECT_FALSE(r.rejected);
}

TEST(SafetyFilter, NonexistentSignalRejectsStep) {
  DslStep sweep;
  sweep.type = StepType::kValueSweep;
  sweep.field = "nonexistent";
  sweep.values = {1};
  DslStep delay;
  delay.type = StepType::kDelay;
  delay.cycles = 4;
  const auto r = apply_safety_filters({"s", "", {sweep, delay}}, ethmac());
  ASSERT_TRUE(r.sequence.has_value());
  ASSERT_EQ(r.sequence->steps.size(), 1u);
  EXPECT_EQ(r.sequence->steps[0].type, StepType::kDelay);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].action, "rejected_step");
  EXPECT_EQ(r.log[0].step, 0);

  const auto only = apply_safety_filters({"s", "", {sweep}}, ethmac());
  EXPECT_TRUE(only.rejected);
  EXPECT_FALSE(only.sequence.has_value());
}

TEST(SafetyFilter, ValidSequenceIsUnchanged) {
  DslSequence seq{"s", "d", {send({{"op", Relation::kEq, {1}}, {"fullduplex", Relation::kInSet, {0, 1}}})}};
  const auto r = apply_safety_filters(seq, ethmac());
  ASSERT_TRUE(r.sequence.has_value());
  EXPECT_EQ(*r.sequence, seq);
  EXPECT_TRUE(r.log.empty());
}

TEST(SafetyFilter, AdversarialCorpus) {
  const json corpus = json::parse(fixture("dsl/adversarial_corpus.json"));
  ASSERT_EQ(corpus.size(), 20u);
  for (const auto& c : corpus) {
    SCOPED_TRACE(c["name"].get<std::string>());
    const auto bp = load_blueprint(c["blueprint"].get<std::string>());
    EXPECT_EQ(tbsynth::testing::check_corpus_case(c, bp), "");
  }
}
