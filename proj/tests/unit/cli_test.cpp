#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "paths.hpp"
#include "proagent/dataset.hpp"
#include "proagent/evalsuite.hpp"

using namespace proagent;
using proagent::cli::run_cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& rel) { return (proagent::testing::data_dir() / rel).string(); }

std::string read(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("proagent_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write_backend(const json& doc) {
    auto path = dir / "backend.json";
    std::ofstream(path) << doc.dump();
    return path.string();
  }

  fs::path dir;
};

}  // namespace

TEST_F(CliTest, ToolsListsTwentyRows) {
  auto r = invoke_cli({"tools"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(line_count(r.out), 21u);
  EXPECT_EQ(line_count(invoke_cli({"tools", "--format", "records"}).out), 20u);
}

TEST_F(CliTest, ValidateExitCodes) {
  EXPECT_EQ(invoke_cli({"validate", data("fixtures/examples.jsonl")}).code, 0);
  EXPECT_EQ(invoke_cli({"validate", (dir / "missing.jsonl").string()}).code, 2);
  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"x\", \"Context information\": \"c\", \"Personas\": [], "
                                      "\"Thoughts\": \"t\", \"Proactive score\": 2, \"Tools\": "
                                      "\"[{\\\"name\\\": \\\"play_music\\\", \\\"params\\\": \\\"None\\\"}]\", "
                                      "\"Response\": \"None\"}\n";
  auto r = invoke_cli({"validate", (dir / "bad.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("ScoreChainMismatch"), std::string::npos);
}

TEST_F(CliTest, SplitWritesSixtyForty) {
  auto r = invoke_cli({"split", data("fixtures/examples.jsonl"), "--ratio", "0.6", "--seed", "42", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "train: 3  test: 2\n");
  EXPECT_TRUE(fs::exists(dir / "train.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "test.jsonl"));
}

TEST_F(CliTest, InferExampleThree) {
  auto r = invoke_cli({"infer", "--dataset", data("fixtures/examples.jsonl"), "--id", "example-3", "--backend-config",
                data("config/backend_replay.json"), "--fixture", data("fixtures/world.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("score: 3\n"), std::string::npos);
  EXPECT_NE(r.out.find("trace:\n  1. get_current_gps_coordinates"), std::string::npos);
  EXPECT_NE(r.out.find("\n  2. get_city_weather(city=Hong Kong, time=now)"), std::string::npos);
  EXPECT_EQ(r.out.find("\n  3. "), r.out.rfind("\n  3. "));
}

TEST_F(CliTest, RunIsDeterministicAndOracleEvalIsPerfect) {
  auto base = std::vector<std::string>{"run", "--config", data("config/run_replay.json"), "--output-dir"};
  auto a = base, b = base;
  a.push_back((dir / "a").string());
  b.push_back((dir / "b").string());
  b.insert(b.end(), {"--parallelism", "4"});
  ASSERT_EQ(invoke_cli(a).code, 0);
  ASSERT_EQ(invoke_cli(b).code, 0);
  for (auto rel : {"predictions/predictions.jsonl", "traces/traces.jsonl"}) {
    EXPECT_EQ(read(dir / "a" / rel), read(dir / "b" / rel)) << rel;
  }
  auto predictions = evalsuite::load_predictions(dir / "a" / "predictions/predictions.jsonl");
  auto truth = evalsuite::ground_truth(dataset::load(data("fixtures/examples.jsonl")).samples);
  EXPECT_EQ(predictions, truth);

  auto r = invoke_cli({"eval", "--predictions", (dir / "a" / "predictions/predictions.jsonl").string(), "--dataset",
                data("fixtures/examples.jsonl"), "--levels", "--format", "records", "--output",
                (dir / "a" / "reports/metrics.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("acc_p"), 1.0);
  EXPECT_EQ(doc.at("f1"), 1.0);
  EXPECT_EQ(doc.at("levels").size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "a" / "reports/metrics.json"));
}

TEST_F(CliTest, StubScoreOneRunsNothing) {
  auto backend = write_backend({{"kind", "fixed_stub"},
                                {"completion", "<think>t</think>{\"proactive_score\": 1, \"tools\": \"None\", \"response\": \"None\"}"}});
  auto r = invoke_cli({"run", "--config", data("config/run_replay.json"), "--backend-config", backend, "--output-dir",
                dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = json::parse(read(dir / "reports/run.json"));
  EXPECT_EQ(report.at("summary").at("executed"), 0);
  for (const auto& p : evalsuite::load_predictions(dir / "predictions/predictions.jsonl")) {
    EXPECT_EQ(p.score.value(), 1);
    EXPECT_TRUE(p.chain.empty());
  }
}

TEST_F(CliTest, RemoteWithoutCredentialExitsTwo) {
  ::unsetenv("PROAGENT_CLI_TEST_KEY");
  auto backend = write_backend({{"kind", "remote"},
                                {"endpoint", "http://127.0.0.1:1/v1/chat/completions"},
                                {"model", "m"},
                                {"credential_env", "PROAGENT_CLI_TEST_KEY"}});
  auto r = invoke_cli({"run", "--config", data("config/run_replay.json"), "--backend-config", backend, "--output-dir",
                dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("CredentialMissing"), std::string::npos);
}

TEST_F(CliTest, EvalMissingIdExitsOne) {
  std::ofstream(dir / "p.jsonl") << "{\"id\": \"example-1\", \"score\": 5, \"tools\": \"None\"}\n";
  auto r = invoke_cli({"eval", "--predictions", (dir / "p.jsonl").string(), "--dataset", data("fixtures/examples.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("IdMismatch"), std::string::npos);
}

TEST_F(CliTest, ExportSftAndStats) {
  auto r = invoke_cli({"export-sft", data("fixtures/examples.jsonl"), "--output", (dir / "sft.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(read(dir / "sft.jsonl")), 5u);
  auto s = invoke_cli({"stats", data("fixtures/examples.jsonl"), "--format", "records"});
  EXPECT_EQ(json::parse(s.out).at("n_samples"), 5);
}

TEST_F(CliTest, GenWithReplayBackend) {
  json candidate{{"Context information", "Visual information shows the user locking a bike at dusk."},
                 {"Personas", {"A nurse on night shifts."}},
                 {"Thoughts", "No need to act."},
                 {"Proactive score", 1},
                 {"Tools", "None"},
                 {"Response", "None"}};
  {
    std::ofstream t(dir / "gen.jsonl");
    t << json{{"id", "gen-1"}, {"completion", candidate.dump() + "\nnot a record\n"}}.dump() << "\n";
  }
  auto backend = write_backend({{"kind", "replay"}, {"transcript", (dir / "gen.jsonl").string()}});
  auto r = invoke_cli({"gen", "--backend-config", backend, "--exemplars", data("fixtures/examples.jsonl"), "--personas",
                data("personas.txt"), "--score", "1", "--count", "1", "--output", (dir / "out.jsonl").string(),
                "--rejected", (dir / "rejected.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(invoke_cli({"validate", (dir / "out.jsonl").string()}).code, 0);
}

TEST_F(CliTest, DumpConfigAndBadInvocations) {
  auto r = invoke_cli({"run", "--config", data("config/run_replay.json"), "--dump-config"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("parallelism"), 2);
  EXPECT_EQ(invoke_cli({}).code, 2);
  EXPECT_EQ(invoke_cli({"split", data("fixtures/examples.jsonl"), "--ratio", "1.5"}).code, 2);
}
