#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "tbsynth/blueprint.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using nlohmann::json;
using tbsynth::testing::fixture;
using tbsynth::testing::load_blueprint;

namespace {

json direct_doc() {
  return json::parse(R"({
    "schema_version": 1,
    "design_name": "acc",
    "protocol": {"type": "direct", "variant": "ready_done"},
    "clock": "clk",
    "reset": {"name": "rst_n", "active": "low"},
    "ports": [
      {"name": "clk", "width": 1, "dir": "input"},
      {"name": "rst_n", "width": 1, "dir": "input"},
      {"name": "start", "width": 1, "dir": "input"},
      {"name": "ready", "width": 1, "dir": "output"},
      {"name": "done", "width": 1, "dir": "output"},
      {"name": "mode", "width": 3, "dir": "input"},
      {"name": "status", "width": 2, "dir": "output"}
    ],
    "seq_item_fields": [
      {"name": "mode", "width": 3, "direction": "to_dut", "role": "control"},
      {"name": "status", "width": 2, "direction": "from_dut", "role": "status"}
    ],
    "registers": [],
    "bfms": []
  })");
}

bool has_kind(const BlueprintParseResult& r, BlueprintErrorKind k) {
  for (const auto& e : r.errors) {
    if (e.kind == k) return true;
  }
  return false;
}

bool has_issue(const ConsistencyReport& r, ConsistencyIssueKind k) {
  for (const auto& i : r.issues) {
    if (i.kind == k) return true;
  }
  return false;
}

}  // namespace

TEST(Blueprint, WishboneFixtureParsesAndResolvesBusRoles) {
  const auto bp = load_blueprint("ethmac_wb.json");
  EXPECT_EQ(bp.protocol.type, Protocol::kWishbone);
  const auto roles = resolve_bus_roles(bp);
  EXPECT_EQ(roles.at("adr"), "wb_adr_i");
  EXPECT_EQ(roles.at("dat_w"), "wb_dat_i");
  EXPECT_EQ(roles.at("dat_r"), "wb_dat_o");
  EXPECT_EQ(roles.at("ack"), "wb_ack_o");
  EXPECT_EQ(bus_data_width(bp), 32);
  EXPECT_EQ(bp.find_port("wb_adr_i")->port_class, PortClass::kStimulus);
  EXPECT_EQ(bp.find_port("wb_ack_o")->port_class, PortClass::kBusHandshake);
  EXPECT_TRUE(consistency_check(bp).passed());
}

TEST(Blueprint, EveryFixtureParsesAndIsConsistent) {
  for (const char* name : {"ethmac_wb.json", "gpio_wb.json", "uart_wb.json", "spi_wb.json", "dma_wb.json",
                           "i2c_wb.json", "timer_axil.json", "uart_axil.json", "gpio_axil.json", "alu_direct.json",
                           "mult_direct.json", "aes_direct.json", "crc_direct.json", "sha_direct.json",
                           "div_direct.json", "huf_direct.json", "fir_direct.json"}) {
    SCOPED_TRACE(name);
    const auto r = parse_blueprint(fixture(std::string("blueprints/") + name));
    ASSERT_TRUE(r.ok()) << (r.errors.empty() ? "" : r.errors.front().to_string());
    EXPECT_TRUE(consistency_check(*r.blueprint).passed());
  }
}

TEST(Blueprint, WishboneWithoutFieldsOrRegistersViolatesInvariant) {
  auto doc = json::parse(fixture("blueprints/ethmac_wb.json"));
  doc["seq_item_fields"] = json::array();
  doc["registers"] = json::array();
  doc["bfms"] = json::array();
  const auto r = blueprint_from_json(doc);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_kind(r, BlueprintErrorKind::kInvariantViolation));
}

TEST(Blueprint, FieldOnClockPortViolatesInvariant) {
  auto doc = direct_doc();
  doc["seq_item_fields"].push_back({{"name", "clk"}, {"width", 1}, {"direction", "to_dut"}, {"role", "data"}});
  const auto r = blueprint_from_json(doc);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_kind(r, BlueprintErrorKind::kInvariantViolation));
  bool mentions = false;
  for (const auto& e : r.errors) mentions |= e.to_string().find("clk") != std::string::npos;
  EXPECT_TRUE(mentions);
}

TEST(Blueprint, SyntaxErrorIsReported) {
  const auto r = parse_blueprint("{\"design_name\": ");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_kind(r, BlueprintErrorKind::kJsonSyntax));
}

TEST(Blueprint, SchemaViolationNamesThePath) {
  auto doc = direct_doc();
  doc["ports"][2]["width"] = "wide";
  const auto r = blueprint_from_json(doc);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_kind(r, BlueprintErrorKind::kSchemaViolation));
  EXPECT_NE(r.errors.front().path.find("ports"), std::string::npos);
}

TEST(Blueprint, RoundTripsThroughJson) {
  const auto bp = load_blueprint("uart_wb.json");
  const auto again = parse_blueprint(serialize_blueprint(bp));
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(*again.blueprint, bp);
}

TEST(ClassifyPorts, Examples) {
  const ProtocolSpec wb{Protocol::kWishbone};
  const ProtocolSpec direct{Protocol::kDirect, HandshakeVariant::kReadyDone};
  EXPECT_EQ(classify_port("wb_ack_o", wb), PortClass::kBusHandshake);
  EXPECT_EQ(classify_port("clk", wb), PortClass::kClock);
  EXPECT_EQ(classify_port("clk", direct), PortClass::kClock);
  EXPECT_EQ(classify_port("tx_data", direct), PortClass::kStimulus);
  EXPECT_EQ(classify_port("wb_rst_i", wb), PortClass::kReset);
  EXPECT_EQ(classify_port("aresetn", ProtocolSpec{Protocol::kAxi4Lite}), PortClass::kReset);
  EXPECT_EQ(classify_port("mdio_pad", direct), PortClass::kPad);
  EXPECT_EQ(classify_port("start", direct), PortClass::kBusHandshake);
}

TEST(ClassifyPorts, ClockBeatsEverythingElse) {
  // "clk" inside a handshake-looking name is still a clock.
  EXPECT_EQ(classify_port("wb_clk_i", ProtocolSpec{Protocol::kWishbone}), PortClass::kClock);
}

TEST(Consistency, MatchingWidthPasses) {
  const auto r = blueprint_from_json(direct_doc());
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(consistency_check(*r.blueprint).passed());
}

TEST(Consistency, TypoCoverpointIsPhantom) {
  auto doc = direct_doc();
  doc["coverpoints"] = json::array({{{"field", "statuss"}, {"bins", json::array()}}});
  const auto r = blueprint_from_json(doc);
  ASSERT_TRUE(r.blueprint.has_value());
  const auto report = consistency_check(*r.blueprint);
  EXPECT_FALSE(report.passed());
  EXPECT_TRUE(has_issue(report, ConsistencyIssueKind::kPhantomCoverpoint));
}

TEST(Consistency, WidthMismatchAgainstPort) {
  auto doc = direct_doc();
  doc["ports"][5]["width"] = 16;
  doc["seq_item_fields"][0]["width"] = 8;
  const auto r = blueprint_from_json(doc);
  ASSERT_TRUE(r.blueprint.has_value());
  const auto report = consistency_check(*r.blueprint);
  ASSERT_TRUE(has_issue(report, ConsistencyIssueKind::kWidthMismatch));
  EXPECT_EQ(report.issues.front().expected, 16);
  EXPECT_EQ(report.issues.front().found, 8);
  EXPECT_EQ(report.issues.front().layer, ConsistencyLayer::kTransaction);
}

TEST(Consistency, MonitorLayerSeesBusWidthDisagreement) {
  auto doc = json::parse(fixture("blueprints/uart_wb.json"));
  for (auto& r : doc["registers"]) r["width"] = 8;
  const auto r = blueprint_from_json(doc);
  ASSERT_TRUE(r.blueprint.has_value());
  const auto report = consistency_check(*r.blueprint);
  ASSERT_FALSE(report.passed());
  EXPECT_EQ(report.issues.front().layer, ConsistencyLayer::kMonitor);
}
