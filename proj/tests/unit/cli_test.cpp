#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "cli_config.hpp"
#include "test_support.hpp"

using namespace tbsynth;
using namespace tbsynth::cli;
using nlohmann::json;
using tbsynth::testing::fixture;
using tbsynth::testing::fixture_dir;
using tbsynth::testing::read_file;
using tbsynth::testing::TempDir;
using tbsynth::testing::write_file;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
  args.insert(args.begin(), "tbsynth");
  std::ostringstream out;
  std::ostringstream err;
  const EnvLookup lookup = [env](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  Result r;
  r.code = run_cli(args, out, err, lookup);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fx(const std::string& rel) { return (fixture_dir() / rel).string(); }

}  // namespace

TEST(Cli, DslWritesOnePackage) {
  TempDir dir("cli_dsl");
  const auto out = dir.path() / "mii.sv";
  const auto r = run({"dsl", fx("dsl/ethmac_mii_read.json"), "-b", fx("blueprints/ethmac_wb.json"), "--out",
                      out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  std::size_t sv_files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) sv_files += e.path().extension() == ".sv";
  EXPECT_EQ(sv_files, 1u);
  EXPECT_NE(read_file(out).find("class mii_read_status"), std::string::npos);
}

TEST(Cli, DslCheckReportsFixes) {
  const auto r = run({"dsl", "--check", fx("dsl/typo_step.json"), "-b", fx("blueprints/ethmac_wb.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("fix: "), std::string::npos);
  EXPECT_NE(r.out.find("register_write"), std::string::npos);
  EXPECT_EQ(r.out.find("class "), std::string::npos);
}

TEST(Cli, DslJsonOutput) {
  const auto r = run({"dsl", "--json", "--check", fx("dsl/typo_step.json"), "-b", fx("blueprints/ethmac_wb.json")});
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_FALSE(j["fixes"].empty());
}

TEST(Cli, DslInvalidDocumentExitsOne) {
  TempDir dir("cli_bad");
  write_file(dir.path() / "bad.json", R"({"sequences": [{"name": "x", "steps": [{"type": "inject_fault"}]}]})");
  const auto r = run({"dsl", (dir.path() / "bad.json").string(), "-b", fx("blueprints/ethmac_wb.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("UnknownStepType"), std::string::npos);
}

TEST(Cli, RunWithMissingScriptedResponseExitsOne) {
  TempDir out("cli_missing");
  const auto r = run({"run", fx("llm/missing_dsl/spec.txt"), "--llm", "scripted:" + fx("llm/missing_dsl"), "--sim",
                      "mock:" + fx("profiles/ethmac_normal.json"), "--out", out.path().string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("dsl_1.json"), std::string::npos);
}

TEST(Cli, RunEndToEndAndReport) {
  TempDir out("cli_run");
  const auto r = run({"run", fx("llm/ethmac_run/spec.txt"), "--llm", "scripted:" + fx("llm/ethmac_run"), "--sim",
                      "mock:" + fx("profiles/ethmac_normal.json"), "--out", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("design ethmac"), std::string::npos);
  const auto rep = run({"report", "--json", out.path().string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  const json j = json::parse(rep.out);
  EXPECT_EQ(j["design"], "ethmac");
  EXPECT_GE(j["history"].size(), 2u);
  EXPECT_EQ(j["table"].size(), 9u);
}

TEST(Cli, FixExhaustedExitsTwo) {
  TempDir llm("cli_fix");
  write_file(llm.path() / "blueprint_1.json", fixture("blueprints/ethmac_wb.json"));
  for (int i = 1; i <= 5; ++i) write_file(llm.path() / ("fix_" + std::to_string(i) + ".json"), R"({"edits": []})");
  TempDir out("cli_fix_out");
  const auto r = run({"run", fx("llm/ethmac_run/spec.txt"), "--llm", "scripted:" + llm.path().string(), "--sim",
                      "mock:" + fx("profiles/ethmac_always_fail.json"), "--out", out.path().string()});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("5 fix iterations"), std::string::npos);
}

TEST(Cli, RejectedBlueprintExitsThree) {
  TempDir llm("cli_bp");
  write_file(llm.path() / "blueprint_1.json", "{");
  write_file(llm.path() / "blueprint_2.json", "{\"design_name\": 3}");
  TempDir out("cli_bp_out");
  const auto r = run({"run", fx("llm/ethmac_run/spec.txt"), "--llm", "scripted:" + llm.path().string(), "--sim",
                      "mock:" + fx("profiles/ethmac_normal.json"), "--out", out.path().string()});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, BlueprintAndRenderCommands) {
  const auto bp = run({"blueprint", fx("blueprints/uart_wb.json")});
  EXPECT_EQ(bp.code, 0);
  EXPECT_NE(bp.out.find("consistency check passed"), std::string::npos);
  const auto render = run({"render", "--json", fx("blueprints/uart_wb.json")});
  ASSERT_EQ(render.code, 0);
  EXPECT_EQ(json::parse(render.out)["violations"], 0);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({"dsl"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"run", "--blueprint", fx("blueprints/uart_wb.json")}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliConfig, LayeringFileEnvFlags) {
  const std::string text = "[run]\nk = 4\nthreshold = 0.5\nout = \"from file\"\n[llm]\nmodel = m1 # comment\n";
  const EnvLookup env = [](const std::string& k) -> std::optional<std::string> {
    if (k == "HAVEN_K") return "6";
    if (k == "HAVEN_LLM_MODEL") return "m2";
    return std::nullopt;
  };
  const auto s = resolve_settings(text, env, {{"run.k", "7"}});
  EXPECT_EQ(s.k, 7);
  EXPECT_DOUBLE_EQ(s.threshold, 0.5);
  EXPECT_EQ(s.out, "from file");
  EXPECT_EQ(s.llm_model, "m2");
  EXPECT_EQ(s.max_fix, 5);
  const auto d = resolve_settings(std::nullopt, [](const std::string&) { return std::nullopt; }, {});
  EXPECT_EQ(d.k, 3);
  EXPECT_DOUBLE_EQ(d.threshold, 0.1);
  const RunConfig c = to_run_config(s);
  EXPECT_EQ(c.k, 7);
}

TEST(CliConfig, Errors) {
  const EnvLookup none = [](const std::string&) { return std::nullopt; };
  EXPECT_THROW(parse_config_text("[run]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("k 3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[run\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[run]\nout = \"open\n"), ConfigError);
  EXPECT_THROW(resolve_settings(std::string("[run]\nk = -1\n"), none, {}), ConfigError);
  EXPECT_THROW(resolve_settings(std::nullopt, none, {{"run.threshold", "abc"}}), ConfigError);
  const EnvLookup bad_env = [](const std::string& k) -> std::optional<std::string> {
    if (k == "HAVEN_MAX_FIX") return "many";
    return std::nullopt;
  };
  EXPECT_THROW(resolve_settings(std::nullopt, bad_env, {}), ConfigError);
  const auto list = resolve_settings(std::string("[predefined]\nfifo_tokens = tx, rx ,q\n"), none, {});
  EXPECT_EQ(list.fifo_tokens, (std::vector<std::string>{"tx", "rx", "q"}));
}

TEST(CliConfig, ConfigFileFromEnvironment) {
  TempDir dir("cli_cfg");
  write_file(dir.path() / "cfg.toml", "[run]\nk = abc\n");
  const auto r = run({"run", "--blueprint", fx("blueprints/uart_wb.json")},
                     {{"HAVEN_CONFIG", (dir.path() / "cfg.toml").string()}});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("run.k"), std::string::npos);
}
