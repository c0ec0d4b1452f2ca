#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "relay/cli/app_config.hpp"
#include "relay/cli/commands.hpp"
#include "relay/errors.hpp"
#include "relay/evaluation.hpp"
#include "relay/transcript_io.hpp"
#include "support.hpp"

namespace relay {
namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "relay");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string mock_spec() { return "mock:" + (testing::source_dir() / "mocks" / "demo.mock").string(); }
std::string mini_dir() { return (testing::source_dir() / "fixtures" / "mini").string(); }
std::string corpus_dir() { return (testing::source_dir() / "fixtures" / "corpus").string(); }

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Cli, EvalOnFixturesMatchesGoldenReport) {
  testing::TempDir dir;
  auto r = run({"--backend", mock_spec(), "--out", dir.path().string(), "--workers", "4", "eval", "--benchmark",
                mini_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto golden = testing::golden_dir() / "cli_eval_report.txt";
  const char* update = std::getenv("RELAY_UPDATE_GOLDEN");
  if (update && std::string(update) == "1") write_file_atomic(golden, r.out);
  EXPECT_EQ(r.out, read_file(golden));
  EXPECT_NE(r.err.find("pairs executed 50, restored 0"), std::string::npos) << r.err;
  for (const char* f : {"mini/report.txt", "mini/report.json", "mini/breakdown.csv", "mini/verdicts/collaborative.jsonl",
                        "runs/mini.collaborative/mini-01.transcript"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }

  auto again = run({"--backend", mock_spec(), "--out", dir.path().string(), "eval", "--benchmark", mini_dir()});
  EXPECT_EQ(again.code, 0);
  EXPECT_EQ(again.out, r.out);
  EXPECT_NE(again.err.find("pairs executed 0, restored 50; cache hits 0, misses 0"), std::string::npos) << again.err;
}

TEST(Cli, EvalSubsetAndFilter) {
  testing::TempDir dir;
  auto r = run({"--backend", mock_spec(), "--out", dir.path().string(), "eval", "--benchmark", mini_dir(),
                "--settings", "perceiver_alone,collaborative", "--filter", "subject=charts", "--name", "charts"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("matrix charts"), std::string::npos);
  EXPECT_EQ(r.out.find("breakdown"), std::string::npos);
  EXPECT_EQ(r.out.find("reasoner_text"), std::string::npos);
  auto bad = run({"--backend", mock_spec(), "--out", dir.path().string(), "eval", "--benchmark", mini_dir(),
                  "--settings", "nope"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("unknown setting 'nope'"), std::string::npos);
}

TEST(Cli, MissingEndpointIsConfigErrorNamingIt) {
  testing::TempDir dir;
  write(dir / "c.json", R"({"endpoints": {"perceiver": {"base_url": "http://x", "model_id": "m", "vision": true}},
    "settings": [{"name": "s", "kind": "collaborative", "perceiver": "perceiver", "reasoner": "thinker"}]})");
  auto r = run({"--config", (dir / "c.json").string(), "--backend", mock_spec(), "eval", "--benchmark", mini_dir()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("thinker"), std::string::npos) << r.err;
}

TEST(Cli, UnreachableEndpointsExitTwo) {
  testing::TempDir dir;
  write(dir / "c.json", R"({"endpoints": {
      "p": {"base_url": "http://127.0.0.1:1/v1", "model_id": "m", "vision": true, "max_retries": 0, "timeout_ms": 300},
      "r": {"base_url": "http://127.0.0.1:1/v1", "model_id": "m", "max_retries": 0, "timeout_ms": 300}},
    "settings": [{"name": "text", "kind": "single_text", "model": "r"}]})");
  auto r = run({"--config", (dir / "c.json").string(), "--out", (dir / "out").string(), "eval", "--benchmark",
                mini_dir()});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("every run failed"), std::string::npos);
}

TEST(Cli, BadUsageExitsOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"eval"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"--backend", "carrier-pigeon", "eval", "--benchmark", mini_dir()}).code, 1);
  EXPECT_EQ(run({"--workers", "0", "--backend", mock_spec(), "eval", "--benchmark", mini_dir()}).code, 1);
}

TEST(Cli, HelpListsCommandsAndFlags) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"--config", "--backend", "--workers", "--seed", "--out", "eval", "synthesize", "export",
                        "breakdown", "transcript"}) {
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  }
}

TEST(Cli, SynthesizeThenExport) {
  testing::TempDir dir;
  auto r = run({"--backend", mock_spec(), "--out", dir.path().string(), "synthesize", "--corpus", corpus_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("records 4\nkept 1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("samples 6\n"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "dataset" / "samples.jsonl"));

  auto exported = run({"--out", dir.path().string(), "export", "--dataset", (dir / "again").string()});
  ASSERT_EQ(exported.code, 0) << exported.err;
  EXPECT_EQ(exported.out, r.out);

  auto empty = dir / "empty";
  std::filesystem::create_directories(empty);
  EXPECT_EQ(run({"--backend", mock_spec(), "--out", (dir / "o2").string(), "synthesize", "--corpus", empty.string()})
                .code,
            0);
  EXPECT_EQ(run({"--backend", mock_spec(), "synthesize", "--corpus", (dir / "missing").string()}).code, 1);
  EXPECT_EQ(run({"--backend", mock_spec(), "synthesize", "--corpus", corpus_dir(), "--teacher", "nobody"}).code, 1);
}

TEST(Cli, BreakdownCommand) {
  testing::TempDir dir;
  ASSERT_EQ(run({"--backend", mock_spec(), "--out", dir.path().string(), "eval", "--benchmark", mini_dir()}).code, 0);
  auto v = dir / "mini" / "verdicts";
  auto r = run({"--out", dir.path().string(), "breakdown", (v / "perceiver_alone.jsonl").string(),
                (v / "reasoner_vision.jsonl").string(), (v / "collaborative.jsonl").string(), "--csv",
                (dir / "b.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(1,1,1)      3"), std::string::npos) << r.out;
  EXPECT_EQ(read_file(dir / "b.csv"), read_file(dir / "mini" / "breakdown.csv"));

  auto partial = parse_verdicts(read_file(v / "collaborative.jsonl"));
  partial.erase("mini-04");
  write_file_atomic(dir / "partial.jsonl", serialize_verdicts(partial));
  auto mismatch = run({"breakdown", (v / "perceiver_alone.jsonl").string(), (v / "reasoner_vision.jsonl").string(),
                       (dir / "partial.jsonl").string(), "--csv", (dir / "x.csv").string()});
  EXPECT_EQ(mismatch.code, 1);
  EXPECT_NE(mismatch.err.find("mini-04"), std::string::npos);
}

TEST(Cli, TranscriptCommand) {
  testing::TempDir dir;
  ASSERT_EQ(run({"--backend", mock_spec(), "--out", dir.path().string(), "eval", "--benchmark", mini_dir(),
                 "--settings", "collaborative"})
                .code,
            0);
  auto r = run({"--out", dir.path().string(), "transcript", "mini.collaborative", "mini-01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("task mini-01"), std::string::npos);
  EXPECT_NE(r.out.find("verdict: G"), std::string::npos) << r.out;
  auto missing = run({"--out", dir.path().string(), "transcript", "mini.collaborative", "mini-99"});
  EXPECT_EQ(missing.code, 1);
}

TEST(AppConfig, DefaultsAndStrictKeys) {
  auto d = cli::default_app_config();
  EXPECT_EQ(d.endpoints.size(), 3u);
  EXPECT_EQ(d.settings.size(), 5u);
  EXPECT_TRUE(cli::validate_app_config(d).empty());
  EXPECT_THROW(cli::parse_app_config("{\"endpoint\": {}}"), ConfigError);
  EXPECT_THROW(cli::parse_app_config("not json"), ConfigError);
  EXPECT_THROW(cli::parse_app_config(R"({"dialogue": {"max_turns": 0}})"), ConfigError);
  EXPECT_THROW(cli::parse_app_config(R"({"dialogue": {"max_turns": "five"}})"), ConfigError);
  EXPECT_THROW(cli::parse_app_config(R"({"settings": [{"name": "x", "kind": "duet"}]})"), ConfigError);
}

TEST(AppConfig, ExampleConfigLoads) {
  auto c = cli::load_app_config(testing::source_dir() / "config" / "example.json");
  EXPECT_TRUE(c.endpoints.contains("perceiver"));
  EXPECT_EQ(c.dialogue, default_dialogue_config());
  EXPECT_EQ(c.settings.size(), 5u);
}

TEST(AppConfig, PerSettingOverrides) {
  auto c = cli::parse_app_config(R"({
    "endpoints": {"p": {"base_url": "http://h", "model_id": "m", "vision": true, "api_key_env": "K"},
                  "r": {"base_url": "http://h", "model_id": "m2", "thinking": true, "timeout_ms": 1000}},
    "dialogue": {"max_turns": 3},
    "settings": [{"name": "c", "kind": "collaborative", "perceiver": "p", "reasoner": "r",
                  "dialogue": {"reasoner_max_tokens": 8192}}],
    "runs_dir": "out"})",
                                 "/base");
  EXPECT_EQ(c.settings[0].dialogue.max_turns, 3u);
  EXPECT_EQ(c.settings[0].dialogue.reasoner_tokens(), 8192u);
  EXPECT_EQ(c.dialogue.reasoner_tokens(), 2048u);
  EXPECT_EQ(c.endpoints["p"].api_key_env, "K");
  EXPECT_EQ(c.endpoints["r"].request_timeout, std::chrono::milliseconds(1000));
  EXPECT_TRUE(c.endpoints["r"].supports_thinking);
  EXPECT_EQ(c.runs_dir, std::filesystem::path("/base/out"));
}

}  // namespace
}  // namespace relay
