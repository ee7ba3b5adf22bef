#include <gtest/gtest.h>

#include "tbsynth/protocol_lint.hpp"
#include "tbsynth/templates.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using tbsynth::testing::load_blueprint;

namespace {

const Blueprint& wb() {
  static const Blueprint bp = load_blueprint("ethmac_wb.json");
  return bp;
}

}  // namespace

TEST(ProtocolLint, BlockingAssignmentInClockedBlock) {
  const std::string sv =
      "module m(input clk);\n"
      "  reg wb_stb;\n"
      "  always @(posedge clk) begin\n"
      "    wb_stb = 1;\n"
      "  end\n"
      "endmodule\n";
  const auto r = check_protocol_rules(sv, wb(), LintTarget::kOther);
  ASSERT_EQ(r.count(LintRule::kNonBlockingDrive), 1u);
  EXPECT_EQ(r.violations.front().line, 4);
}

TEST(ProtocolLint, BlockingDriveThroughVirtualInterface) {
  const std::string sv =
      "class d;\n"
      "  task run();\n"
      "    vif.wb_stb_i = 1'b1;\n"
      "    vif.wb_cyc_i <= 1'b1;\n"
      "  endtask\n"
      "endclass\n";
  const auto r = check_protocol_rules(sv, wb(), LintTarget::kDriver);
  EXPECT_EQ(r.count(LintRule::kNonBlockingDrive), 1u);
}

TEST(ProtocolLint, UnboundedWaitLoop) {
  const std::string sv =
      "class d;\n"
      "  task run();\n"
      "    while (!vif.wb_ack_o);\n"
      "  endtask\n"
      "endclass\n";
  const auto r = check_protocol_rules(sv, wb(), LintTarget::kDriver);
  EXPECT_EQ(r.count(LintRule::kBoundedLoop), 1u);
}

TEST(ProtocolLint, BoundedDoWhileIsAccepted) {
  const std::string sv =
      "class d;\n"
      "  task run();\n"
      "    int n = 0;\n"
      "    do begin\n"
      "      @(posedge vif.wb_clk_i);\n"
      "      n++;\n"
      "    end while (!vif.wb_ack_o && n < 16);\n"
      "  endtask\n"
      "endclass\n";
  EXPECT_TRUE(check_protocol_rules(sv, wb(), LintTarget::kDriver).passed());
}

TEST(ProtocolLint, WaitAndForeverRules) {
  EXPECT_EQ(check_protocol_rules("class s; task body(); wait (x); endtask endclass", wb(), LintTarget::kSequence)
                .count(LintRule::kBoundedLoop),
            1u);
  const std::string fe = "class s; task body(); forever begin end endtask endclass";
  EXPECT_EQ(check_protocol_rules(fe, wb(), LintTarget::kSequence).count(LintRule::kBoundedLoop), 1u);
  EXPECT_TRUE(check_protocol_rules(fe, wb(), LintTarget::kMonitor).passed());
}

TEST(ProtocolLint, UnknownSignal) {
  const auto r = check_protocol_rules("class d; task t(); vif.wb_stb <= 1; endtask endclass", wb(), LintTarget::kDriver);
  ASSERT_EQ(r.count(LintRule::kSignalExists), 1u);
  EXPECT_NE(r.violations.front().message.find("wb_stb"), std::string::npos);
}

TEST(ProtocolLint, UnbalancedBlocks) {
  const auto r = check_protocol_rules("module m; initial begin end end endmodule", wb(), LintTarget::kOther);
  EXPECT_GE(r.count(LintRule::kBalancedBlocks), 1u);
  EXPECT_GE(check_protocol_rules("class c; function f(); endclass", wb(), LintTarget::kOther)
                .count(LintRule::kBalancedBlocks),
            1u);
}

TEST(ProtocolLint, ClassMemberNamedLikePortIsNotADrive) {
  const std::string sv =
      "class item;\n"
      "  rand bit [7:0] wb_sel_i;\n"
      "  function new();\n"
      "    wb_sel_i = 8'h0;\n"
      "  endfunction\n"
      "endclass\n";
  EXPECT_TRUE(check_protocol_rules(sv, wb(), LintTarget::kOther).passed());
}

TEST(ProtocolLint, RenderedWishboneDriverIsClean) {
  const auto cs = render_all(wb(), infer_all(wb()));
  for (const auto& c : cs) {
    SCOPED_TRACE(c.file_name);
    EXPECT_TRUE(check_protocol_rules(c.content, wb()).passed()) << check_protocol_rules(c.content, wb()).summary();
  }
}

TEST(ProtocolLint, SummaryNamesRuleAndLine) {
  const auto r = check_protocol_rules("module m;\nwait (x);\nendmodule\n", wb(), LintTarget::kOther);
  EXPECT_NE(r.summary().find("bounded_loop line 2"), std::string::npos);
}
