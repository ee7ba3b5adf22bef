#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "tbsynth/template_engine.hpp"

using namespace tbsynth;
using nlohmann::json;

namespace {

std::string header(const std::string& slots) {
  return "{# @name t\n   @kind driver\n   @scope protocol_agnostic\n   @slots " + slots + " #}\n";
}

}  // namespace

TEST(TemplateEngine, SubstitutesSlotsAndFilters) {
  auto t = Template::parse(header("name width") + "module {{name}}; // {{ name | upper }} {{width|hex}}\n");
  EXPECT_EQ(t.render({{"name", "Core"}, {"width", 255}}), "module Core; // CORE ff\n");
}

TEST(TemplateEngine, LoopsExposeIndexFirstLast) {
  auto t = Template::parse(header("ports") +
                           "{% for p in ports %}\n"
                           "{{loop.index0}}/{{loop.index}}:{{p.name}}{% if not loop.last %},{% endif %}\n"
                           "{% endfor %}\n");
  const json ctx = {{"ports", json::array({{{"name", "a"}}, {{"name", "b"}}, {{"name", "c"}}})}};
  EXPECT_EQ(t.render(ctx), "0/1:a,\n1/2:b,\n2/3:c\n");
}

TEST(TemplateEngine, ConditionsWithComparisonsAndElif) {
  auto t = Template::parse(header("mode") +
                           "{% if mode == \"a\" %}\nA\n{% elif mode != \"b\" %}\nC\n{% else %}\nB\n{% endif %}\n");
  EXPECT_EQ(t.render({{"mode", "a"}}), "A\n");
  EXPECT_EQ(t.render({{"mode", "b"}}), "B\n");
  EXPECT_EQ(t.render({{"mode", "x"}}), "C\n");
}

TEST(TemplateEngine, AndOrChainLeftToRight) {
  auto t = Template::parse(header("a b") + "{% if a and b %}y{% else %}n{% endif %}");
  EXPECT_EQ(t.render({{"a", true}, {"b", true}}), "y");
  EXPECT_EQ(t.render({{"a", true}, {"b", false}}), "n");
}

TEST(TemplateEngine, CommentsAreDropped) {
  auto t = Template::parse(header("x") + "a{# hidden #}b {{x}}");
  EXPECT_EQ(t.render({{"x", 1}}), "ab 1");
}

TEST(TemplateEngine, MissingRequiredSlotThrows) {
  auto t = Template::parse(header("reset reset_active") + "if ({{reset}} == {{reset_active}})");
  try {
    t.render({{"reset", "rst"}});
    FAIL() << "expected MissingSlot";
  } catch (const MissingSlot& e) {
    EXPECT_EQ(e.slot(), "reset_active");
  }
}

TEST(TemplateEngine, SyntaxErrors) {
  EXPECT_THROW(Template::parse(header("x") + "{% if x %}open"), TemplateSyntaxError);
  EXPECT_THROW(Template::parse(header("x") + "{% endfor %}"), TemplateSyntaxError);
  EXPECT_THROW(Template::parse(header("x") + "{{ y }}"), TemplateSyntaxError);
  EXPECT_THROW(Template::parse(header("x") + "{{ x | shout }}"), TemplateSyntaxError);
  EXPECT_THROW(Template::parse("no header {{x}}"), TemplateSyntaxError);
  EXPECT_THROW(Template::parse("{# @name t\n @kind driver\n @scope nowhere\n @slots x #}"), TemplateSyntaxError);
}

TEST(TemplateEngine, HeaderAttributesAreKept) {
  auto t = Template::parse("{# @name t\n   @kind bfm\n   @scope protocol_agnostic\n   @slots x\n   @action go n #}\n{{x}}");
  EXPECT_EQ(t.name(), "t");
  EXPECT_EQ(t.kind(), "bfm");
  ASSERT_EQ(t.attribute("action").size(), 1u);
  EXPECT_EQ(t.attribute("action")[0], "go n");
  EXPECT_TRUE(t.required_slots().count("x"));
}
