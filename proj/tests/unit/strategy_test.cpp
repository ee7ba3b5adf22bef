#include <gtest/gtest.h>

#include <random>

#include "tbsynth/strategy.hpp"
#include "test_support.hpp"

using namespace tbsynth;

namespace {

SeqItemField field(FieldRole role, int width, std::optional<std::uint64_t> def = std::nullopt) {
  SeqItemField f;
  f.name = "f";
  f.role = role;
  f.width = width;
  f.default_value = def;
  return f;
}

std::vector<std::uint64_t> iota_values(int width) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t i = 0; i < (1ULL << width); ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST(InferStrategy, Examples) {
  auto s = infer_strategy(field(FieldRole::kData, 4));
  EXPECT_EQ(s.kind, StrategyKind::kEnumerate);
  EXPECT_EQ(s.values, iota_values(4));

  EXPECT_EQ(infer_strategy(field(FieldRole::kData, 5)).kind, StrategyKind::kCrv);

  s = infer_strategy(field(FieldRole::kConfig, 2, 1));
  EXPECT_EQ(s.kind, StrategyKind::kFixed);
  EXPECT_EQ(s.fixed_value, 1u);

  s = infer_strategy(field(FieldRole::kData, 1));
  EXPECT_EQ(s.kind, StrategyKind::kEnumerate);
  EXPECT_EQ(s.values, (std::vector<std::uint64_t>{0, 1}));
}

TEST(InferStrategy, ConfigWithoutDefaultFollowsWidth) {
  EXPECT_EQ(infer_strategy(field(FieldRole::kConfig, 3)).kind, StrategyKind::kEnumerate);
  EXPECT_EQ(infer_strategy(field(FieldRole::kConfig, 12)).kind, StrategyKind::kCrv);
}

TEST(InferStrategy, DefaultOnNonConfigIsIgnored) {
  EXPECT_EQ(infer_strategy(field(FieldRole::kData, 2, 1)).kind, StrategyKind::kEnumerate);
  EXPECT_EQ(infer_strategy(field(FieldRole::kControl, 9, 3)).kind, StrategyKind::kCrv);
}

TEST(InferStrategy, RandomizedPropertyMatchesMappingTable) {
  std::mt19937 rng(20240611);
  const FieldRole roles[] = {FieldRole::kData, FieldRole::kConfig, FieldRole::kControl, FieldRole::kStatus};
  std::uniform_int_distribution<int> role_d(0, 3), width_d(1, 32), coin(0, 1);
  for (int n = 0; n < 5000; ++n) {
    const FieldRole role = roles[role_d(rng)];
    const int w = width_d(rng);
    std::optional<std::uint64_t> def;
    if (coin(rng)) def = std::uniform_int_distribution<std::uint64_t>(0, (1ULL << w) - 1)(rng);
    const auto s = infer_strategy(field(role, w, def));
    SCOPED_TRACE("width " + std::to_string(w) + " role " + std::string(to_string(role)) +
                 (def ? " default" : ""));
    if (role == FieldRole::kConfig && def) {
      ASSERT_EQ(s.kind, StrategyKind::kFixed);
      ASSERT_EQ(s.fixed_value, *def);
    } else if (w <= 4) {
      ASSERT_EQ(s.kind, StrategyKind::kEnumerate);
      ASSERT_EQ(s.values.size(), std::size_t{1} << w);
      ASSERT_EQ(s.values, iota_values(w));
    } else {
      ASSERT_EQ(s.kind, StrategyKind::kCrv);
      ASSERT_TRUE(s.values.empty());
    }
  }
}

TEST(InferAll, ComposesFieldsAndSkipsFromDut) {
  Blueprint bp;
  auto a = field(FieldRole::kData, 3);
  a.name = "a";
  auto b = field(FieldRole::kData, 8);
  b.name = "b";
  auto c = field(FieldRole::kConfig, 2, 0);
  c.name = "c";
  auto d = field(FieldRole::kStatus, 1);
  d.name = "d";
  d.direction = FieldDirection::kFromDut;
  bp.seq_item_fields = {a, b, c, d};
  const auto m = infer_all(bp);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.at("a").kind, StrategyKind::kEnumerate);
  EXPECT_EQ(m.at("a").values.size(), 8u);
  EXPECT_EQ(m.at("b").kind, StrategyKind::kCrv);
  EXPECT_EQ(m.at("c").kind, StrategyKind::kFixed);
  EXPECT_EQ(m.at("c").fixed_value, 0u);
  EXPECT_FALSE(m.count("d"));
}

TEST(InferAll, EmptyAndAllFromDut) {
  Blueprint bp;
  EXPECT_TRUE(infer_all(bp).empty());
  auto d = field(FieldRole::kStatus, 4);
  d.direction = FieldDirection::kFromDut;
  bp.seq_item_fields = {d};
  EXPECT_TRUE(infer_all(bp).empty());
}

TEST(InferAll, JsonListsKinds) {
  const auto bp = tbsynth::testing::load_blueprint("ethmac_wb.json");
  const auto j = to_json(infer_all(bp));
  EXPECT_EQ(j["fullduplex"]["kind"], "enumerate");
  EXPECT_EQ(j["clkdiv"]["kind"], "fixed");
}
