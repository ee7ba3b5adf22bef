#include <gtest/gtest.h>

#include <algorithm>

#include "tbsynth/protocol_lint.hpp"
#include "tbsynth/templates.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using tbsynth::testing::load_blueprint;

namespace {

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + needle.size())) ++n;
  return n;
}

const RenderedComponent& component(const std::vector<RenderedComponent>& cs, ComponentKind k) {
  for (const auto& c : cs) {
    if (c.kind == k) return c;
  }
  throw std::runtime_error("component missing");
}

}  // namespace

TEST(Templates, BuiltinLibraryHasEveryDriverAndBfm) {
  const auto& lib = TemplateLibrary::builtin();
  for (const auto& p : {ProtocolSpec{Protocol::kWishbone}, ProtocolSpec{Protocol::kAxi4Lite},
                        ProtocolSpec{Protocol::kDirect, HandshakeVariant::kReadyDone},
                        ProtocolSpec{Protocol::kDirect, HandshakeVariant::kValidReady},
                        ProtocolSpec{Protocol::kDirect, HandshakeVariant::kBusy},
                        ProtocolSpec{Protocol::kDirect, HandshakeVariant::kStreaming}}) {
    const Template* t = lib.find(ComponentKind::kDriver, p);
    ASSERT_NE(t, nullptr) << protocol_scope_name(p);
    EXPECT_EQ(t->scope(), protocol_scope_name(p));
    EXPECT_NE(lib.find(ComponentKind::kMonitor, p), nullptr);
  }
  for (auto k : all_bfm_kinds()) {
    EXPECT_NE(lib.find_bfm(k), nullptr) << to_string(k);
    ASSERT_NE(lib.bfm_info(k), nullptr);
    EXPECT_FALSE(lib.bfm_info(k)->actions.empty());
  }
}

TEST(Templates, WishboneDriverForSpiControllerUsesBlueprintNames) {
  const auto bp = load_blueprint("spi_wb.json");
  const auto cs = render_all(bp, infer_all(bp));
  const auto& drv = component(cs, ComponentKind::kDriver);
  EXPECT_NE(drv.content.find("vif.wb_stb_i <="), std::string::npos);
  EXPECT_NE(drv.content.find("vif.wb_adr_i <="), std::string::npos);
  EXPECT_NE(drv.content.find("wb_ack_o"), std::string::npos);
  EXPECT_EQ(drv.content.find("vif.wb_stb_i = "), std::string::npos);
  EXPECT_TRUE(check_protocol_rules(drv.content, bp, LintTarget::kDriver).passed());
  EXPECT_TRUE(drv.is_protected);
}

TEST(Templates, ComponentCountsAndOrder) {
  const auto spi = load_blueprint("spi_wb.json");
  const auto cs = render_all(spi, infer_all(spi));
  ASSERT_EQ(cs.size(), 7u);
  EXPECT_EQ(cs.front().kind, ComponentKind::kSeqItem);
  EXPECT_FALSE(cs.front().is_protected);
  EXPECT_EQ(cs[5].kind, ComponentKind::kBfm);
  EXPECT_EQ(cs.back().kind, ComponentKind::kTop);

  const auto dma = load_blueprint("dma_wb.json");
  EXPECT_EQ(render_all(dma, infer_all(dma)).size(), 6u);
}

TEST(Templates, InconsistentBlueprintIsRefused) {
  auto bp = load_blueprint("alu_direct.json");
  bp.seq_item_fields[0].width = 8;  // port a is 16 bits
  EXPECT_THROW(render_all(bp, infer_all(bp)), BlueprintRejected);
}

TEST(Templates, MissingResetSlot) {
  auto bp = load_blueprint("alu_direct.json");
  bp.reset.name.clear();
  const Template* t = TemplateLibrary::builtin().find(ComponentKind::kDriver, bp.protocol);
  ASSERT_NE(t, nullptr);
  EXPECT_THROW(render(*t, bp, infer_all(bp)), MissingSlot);
}

TEST(Templates, RenderingIsDeterministic) {
  const auto bp = load_blueprint("ethmac_wb.json");
  const auto s = infer_all(bp);
  EXPECT_EQ(render_all(bp, s), render_all(bp, s));
}

TEST(Templates, AutoBins) {
  EXPECT_EQ(auto_bins(2).size(), 4u);
  EXPECT_EQ(auto_bins(3).size(), 8u);
  EXPECT_EQ(auto_bins(4).size(), 16u);
  EXPECT_EQ(auto_bins(8).size(), 16u);
  EXPECT_EQ(auto_bins(32).size(), 16u);
}

TEST(Templates, CovergroupsFromFieldWidthsAndExplicitBins) {
  Blueprint bp = load_blueprint("mult_direct.json");
  std::string text = generate_covergroups(bp, infer_all(bp));
  EXPECT_NE(text.find("coverpoint"), std::string::npos);

  Blueprint three = load_blueprint("alu_direct.json");
  three.seq_item_fields = {three.seq_item_fields[2]};  // opcode, 3 bits
  three.ports.erase(std::remove_if(three.ports.begin(), three.ports.end(),
                                   [](const PortDecl& p) { return p.name == "a" || p.name == "b" || p.name == "result"; }),
                    three.ports.end());
  text = generate_covergroups(three, infer_all(three));
  EXPECT_EQ(count(text, "bins "), 8);

  Blueprint two = three;
  two.seq_item_fields[0].width = 2;
  for (auto& p : two.ports) {
    if (p.name == "opcode") p.width = 2;
  }
  EXPECT_EQ(count(generate_covergroups(two, infer_all(two)), "bins "), 4);

  Blueprint wide = three;
  wide.seq_item_fields[0].width = 8;
  for (auto& p : wide.ports) {
    if (p.name == "opcode") p.width = 8;
  }
  EXPECT_EQ(count(generate_covergroups(wide, infer_all(wide)), "bins "), 16);

  Blueprint named = wide;
  named.seq_item_fields[0].cover_bins = std::vector<CoverBin>{{"low", CoverBinKind::kRange, 0, 127},
                                                              {"high", CoverBinKind::kRange, 128, 255}};
  const std::string n = generate_covergroups(named, infer_all(named));
  EXPECT_EQ(count(n, "bins "), 2);
  EXPECT_NE(n.find("bins low"), std::string::npos);
  EXPECT_NE(n.find("bins high"), std::string::npos);
}

TEST(Templates, BfmPortMismatchIsReported) {
  auto bp = load_blueprint("spi_wb.json");
  bp.bfms[0].connections["no_such_port"] = "miso_i";
  EXPECT_THROW(render_all(bp, infer_all(bp)), BfmPortMismatch);
}

TEST(Templates, LoadsTemplatesFromSources) {
  const auto lib = TemplateLibrary::from_sources(
      {{"x.tpl", "{# @name custom\n @kind driver\n @scope protocol_agnostic\n @slots design_name #}\n// {{design_name}}\n"}});
  const Template* t = lib.find(ComponentKind::kDriver, ProtocolSpec{Protocol::kWishbone});
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->name(), "custom");
}
