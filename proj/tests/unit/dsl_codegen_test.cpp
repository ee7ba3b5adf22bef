#include <gtest/gtest.h>

#include <cstdlib>
#include <regex>

#include <nlohmann/json.hpp>

#include "tbsynth/protocol_lint.hpp"
#include "tbsynth/seq_dsl.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using nlohmann::json;
using tbsynth::testing::fixture;
using tbsynth::testing::load_blueprint;

namespace {

DslSequence load_sequence(const std::string& rel, const Blueprint& bp) {
  const auto r = validate(auto_fix(json::parse(fixture(rel)), bp).document, bp);
  if (!r.ok()) throw std::runtime_error(rel + ": " + r.errors.front().to_string());
  return r.document->sequences.at(0);
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

class StepGolden : public ::testing::TestWithParam<const char*> {};

TEST_P(StepGolden, MatchesGoldenFile) {
  const auto bp = load_blueprint("sdram_wb.json");
  const std::string type = GetParam();
  const std::string sv = generate_sequence(load_sequence("dsl/steps/" + type + ".json", bp), bp);
  const auto path = tbsynth::testing::golden_dir() / "steps" / (type + ".sv");
  if (std::getenv("TBSYNTH_UPDATE_GOLDEN")) tbsynth::testing::write_file(path, sv);
  EXPECT_EQ(sv, tbsynth::testing::read_file(path));
  EXPECT_TRUE(check_protocol_rules(sv, bp, LintTarget::kSequence).passed())
      << check_protocol_rules(sv, bp, LintTarget::kSequence).summary();
}

INSTANTIATE_TEST_SUITE_P(AllStepTypes, StepGolden,
                         ::testing::Values("register_write", "register_read", "poll", "randomize_send", "delay",
                                           "memory_write", "bfm_action", "config_sweep", "value_sweep",
                                           "toggle_pattern"));

TEST(Codegen, MiiReadWriteThenBoundedReadLoop) {
  const auto bp = load_blueprint("ethmac_wb.json");
  const std::string sv = generate_sequence(load_sequence("dsl/ethmac_mii_read.json", bp), bp);
  const auto start = sv.find("start_item(");
  const auto finish = sv.find("finish_item(", start);
  const auto loop = sv.find("do begin", finish);
  const auto bound = sv.find("end while", loop);
  ASSERT_NE(start, std::string::npos);
  ASSERT_NE(finish, std::string::npos);
  ASSERT_NE(loop, std::string::npos);
  ASSERT_NE(bound, std::string::npos);
  EXPECT_NE(sv.substr(start, finish - start).find("8'h2c"), std::string::npos);
  const std::string cond = sv.substr(bound, sv.find(';', bound) - bound);
  EXPECT_NE(cond.find("< 100"), std::string::npos);
  EXPECT_NE(cond.find("32'h2"), std::string::npos);
  EXPECT_TRUE(check_protocol_rules(sv, bp, LintTarget::kSequence).passed());
}

TEST(Codegen, TransmitViaTxBufferPollsStatusBit3) {
  const auto bp = load_blueprint("uart_wb.json");
  json doc = {{"schema_version", "1"},
              {"sequences",
               {{{"name", "transmit_frame_via_tx_buffer"},
                 {"steps",
                  {{{"type", "register_write"}, {"addr", "tx_data"}, {"value", "0x55"}},
                   {{"type", "poll"}, {"addr", "line_status"}, {"mask", 8}, {"expected", 8}, {"max_iters", 64}}}}}}}};
  const auto r = validate(auto_fix(doc, bp).document, bp);
  ASSERT_TRUE(r.ok());
  const std::string sv = generate_sequence(r.document->sequences[0], bp);
  const auto write = sv.find("seq_tr.wb_dat_i = 32'h55;");
  const auto poll = sv.find("& 32'h8) != 32'h8", write);
  EXPECT_NE(write, std::string::npos);
  EXPECT_NE(poll, std::string::npos);
  EXPECT_NE(sv.find("< 64"), std::string::npos);
}

TEST(Codegen, ToggleValues) {
  EXPECT_EQ(toggle_values(TogglePattern::kWalkingOne, 4), (std::vector<std::uint64_t>{1, 2, 4, 8}));
  EXPECT_EQ(toggle_values(TogglePattern::kWalkingZero, 4), (std::vector<std::uint64_t>{0xe, 0xd, 0xb, 0x7}));
  const auto alt = toggle_values(TogglePattern::kAlternating, 8);
  ASSERT_EQ(alt.size(), 2u);
  EXPECT_EQ(alt[0] ^ alt[1], 0xffu);
}

TEST(Codegen, ConfigSweepIsRowMajor) {
  const auto rows = expand_config_sweep({{"a", {0, 1}}, {"b", {2, 3}}});
  EXPECT_EQ(rows, (std::vector<std::vector<std::uint64_t>>{{0, 2}, {0, 3}, {1, 2}, {1, 3}}));
}

TEST(Codegen, TransactionCounts) {
  const auto bp = load_blueprint("sdram_wb.json");
  EXPECT_EQ(transaction_count(load_sequence("dsl/steps/toggle_pattern.json", bp).steps[0], bp), 3u);
  EXPECT_EQ(transaction_count(load_sequence("dsl/steps/config_sweep.json", bp).steps[0], bp), 4u);
  EXPECT_EQ(transaction_count(load_sequence("dsl/steps/value_sweep.json", bp).steps[0], bp), 3u);
  EXPECT_EQ(transaction_count(load_sequence("dsl/steps/register_write.json", bp).steps[0], bp), 1u);

  const auto four = load_blueprint("alu_direct.json");
  DslStep t;
  t.type = StepType::kTogglePattern;
  t.field = "opcode";
  t.pattern = TogglePattern::kWalkingOne;
  EXPECT_EQ(transaction_count(t, four), 3u);
}

TEST(Codegen, WalkingOneOnFourBitFieldSendsFourItems) {
  auto bp = load_blueprint("alu_direct.json");
  for (auto& f : bp.seq_item_fields) {
    if (f.name == "opcode") f.width = 4;
  }
  for (auto& p : bp.ports) {
    if (p.name == "opcode") p.width = 4;
  }
  DslStep t;
  t.type = StepType::kTogglePattern;
  t.field = "opcode";
  const DslSequence seq{"walk", "", {t}};
  ASSERT_TRUE(check_step(t, bp).empty());
  const std::string sv = generate_sequence(seq, bp);
  EXPECT_NE(sv.find("'{4'h1, 4'h2, 4'h4, 4'h8}"), std::string::npos) << sv;
}

TEST(Codegen, PackageHasOneClassAndRegistryEntryPerSequence) {
  const auto bp = load_blueprint("sdram_wb.json");
  std::vector<DslSequence> seqs = {load_sequence("dsl/steps/delay.json", bp),
                                   load_sequence("dsl/steps/poll.json", bp)};
  const std::string pkg = generate_sequence_package(seqs, bp, 2);
  EXPECT_EQ(count(pkg, "extends sdram_ctrl_base_seq"), 2u);
  EXPECT_NE(pkg.find("step_delay"), std::string::npos);
  EXPECT_NE(pkg.find("step_poll"), std::string::npos);
  EXPECT_EQ(sequence_package_file_name(2), "sequence_pkg_iter2.sv");
  EXPECT_EQ(generate_sequence_package(seqs, bp, 2), pkg);
  EXPECT_TRUE(check_protocol_rules(pkg, bp, LintTarget::kSequence).passed());
}
