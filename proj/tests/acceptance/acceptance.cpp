// Acceptance suite: one PASS/FAIL/SKIP line per criterion.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "chain_gen.hpp"
#include "cli.hpp"
#include "parse_arg_oracle.hpp"
#include "paths.hpp"
#include "proagent/chainlang.hpp"
#include "proagent/dataset.hpp"
#include "proagent/evalsuite.hpp"
#include "proagent/executor.hpp"
#include "reference_interpreter.hpp"

using namespace proagent;
using nlohmann::json;
namespace fs = std::filesystem;
namespace ev = proagent::evalsuite;

namespace {

// Pinned tolerances.
constexpr double kFormulaTol = 1e-9;
constexpr double kReportedRowTol = 0.001;
constexpr double kIdentityBudgetS = 1.0;
constexpr double kOracleBudgetS = 5.0;
constexpr double kExecutorBudgetS = 1.0;

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass(std::string d) { return {Verdict::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::Fail, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << std::fixed << v;
  return s.str();
}

const dataset::Dataset& examples() {
  static const auto d = dataset::load(proagent::testing::examples_dataset());
  return d;
}

std::vector<json> example_records() {
  std::ifstream in(proagent::testing::examples_dataset());
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    auto r = json::parse(line);
    if (!r.contains("header")) out.push_back(r);
  }
  return out;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("proagent_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string data(const std::string& rel) { return (proagent::testing::data_dir() / rel).string(); }

// ------------------------------------------------------------ criteria

Outcome metric_identity() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20250115);
  std::uniform_int_distribution<int> score(1, 5), size(1, 80);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = size(rng);
    std::vector<ev::Prediction> p, g;
    for (int i = 0; i < n; ++i) {
      auto id = "s" + std::to_string(i);
      p.push_back({id, ProactiveScore(score(rng)), {}, false});
      g.push_back({id, ProactiveScore(score(rng)), {}, false});
    }
    auto m = ev::proactive_metrics(p, g);
    bool exact = m.acc_p.total == n && m.md.total == n && m.fd.total == n &&
                 m.acc_p.count + m.md.count + m.fd.count == n;
    if (!exact) return fail("trial " + std::to_string(trial) + ": counts do not sum to n");
  }
  double elapsed = seconds_since(t0);

  // Acc-P, MD, FD rows of the reported main results table.
  struct Row {
    const char* label;
    double acc_p, md, fd;
  };
  const Row rows[] = {
      {"Llama Proactive Agent", 0.676, 0.017, 0.306}, {"Llama Vanilla ICL", 0.742, 0.224, 0.033},
      {"Llama CoT", 0.699, 0.278, 0.023},            {"Llama ICL-P", 0.742, 0.242, 0.015},
      {"Llama ICL-All", 0.757, 0.229, 0.012},        {"Llama Vanilla SFT", 0.813, 0.068, 0.117},
      {"Llama full method", 0.874, 0.030, 0.095},   {"DeepSeek Proactive Agent", 0.544, 0.411, 0.044},
      {"DeepSeek Vanilla ICL", 0.646, 0.248, 0.105}, {"DeepSeek CoT", 0.653, 0.319, 0.027},
      {"DeepSeek ICL-P", 0.690, 0.227, 0.081},       {"DeepSeek ICL-All", 0.704, 0.268, 0.0272},
      {"DeepSeek Vanilla SFT", 0.823, 0.068, 0.108}, {"DeepSeek full method", 0.888, 0.027, 0.085},
      {"Qwen Proactive Agent", 0.799, 0.136, 0.064}, {"Qwen Vanilla ICL", 0.816, 0.088, 0.095},
      {"Qwen CoT", 0.833, 0.085, 0.081},             {"Qwen ICL-P", 0.833, 0.091, 0.074},
      {"Qwen ICL-All", 0.867, 0.088, 0.044},         {"Qwen Vanilla SFT", 0.775, 0.088, 0.136},
      {"Qwen full method", 0.894, 0.013, 0.091},
  };
  std::string outliers;
  std::size_t n_out = 0;
  for (const auto& r : rows) {
    double sum = r.acc_p + r.md + r.fd;
    if (std::abs(sum - 1.0) > kReportedRowTol + 1e-12) {
      ++n_out;
      outliers += std::string(outliers.empty() ? "" : ", ") + r.label + " " + fmt(sum, 4);
    }
  }
  std::string detail = "1000 random sets sum exactly to n in " + fmt(elapsed, 3) + " s; reported rows outside " +
                       fmt(kReportedRowTol, 3) + ": " + std::to_string(n_out) + "/" +
                       std::to_string(std::size(rows)) + (outliers.empty() ? "" : " (" + outliers + ")");
  return verdict(elapsed < kIdentityBudgetS && n_out == 0, detail);
}

Outcome oracle_round_trip() {
  auto t0 = std::chrono::steady_clock::now();
  auto dir = scratch("oracle");
  auto run = invoke({"run", "--config", data("config/run_replay.json"), "--output-dir", dir.string()});
  if (run.code != 0) return fail("run exited " + std::to_string(run.code) + ": " + run.err);
  auto eval = invoke({"eval", "--predictions", (dir / "predictions" / "predictions.jsonl").string(), "--dataset",
                      data("fixtures/examples.jsonl"), "--format", "records", "--output",
                      (dir / "reports" / "metrics.json").string()});
  if (eval.code != 0) return fail("eval exited " + std::to_string(eval.code) + ": " + eval.err);
  double elapsed = seconds_since(t0);
  auto r = ev::report_from_json(json::parse(eval.out));
  auto v = [](const ev::Ratio& x) { return x.value(); };
  bool exact = v(r.proactive.acc_p) == 1.0 && v(r.proactive.md) == 0.0 && v(r.proactive.fd) == 0.0 &&
               r.proactive.rmse() == 0.0 && r.tools.precision == 1.0 && r.tools.recall == 1.0 &&
               r.tools.f1 == 1.0 && v(r.acc_args) == 1.0;
  fs::remove_all(dir);
  return verdict(exact && elapsed < kOracleBudgetS,
                 "acc_p " + fmt(v(r.proactive.acc_p), 3) + ", md " + fmt(v(r.proactive.md), 3) + ", fd " +
                     fmt(v(r.proactive.fd), 3) + ", rmse " + fmt(r.proactive.rmse().value_or(NAN), 3) + ", f1 " +
                     fmt(r.tools.f1.value_or(NAN), 3) + ", acc_args " + fmt(v(r.acc_args), 3) + " in " +
                     fmt(elapsed, 3) + " s");
}

Outcome hand_computed() {
  auto A = ToolCall("get_current_datetime"), B = ToolCall("play_music"), C = ToolCall("get_health_data");
  std::vector<ev::Prediction> pred{{"x", ProactiveScore(5), ToolChain({A, B}), false}};
  std::vector<ev::Prediction> truth{{"x", ProactiveScore(5), ToolChain({A, B, C}), false}};
  auto t = ev::tool_metrics(pred, truth);
  // Direct formula evaluation.
  double p = 2.0 / 2.0, rec = 2.0 / 3.0, f1 = 2 * p * rec / (p + rec);

  std::vector<ev::Prediction> ps, gs;
  int pv[] = {5, 1, 4}, gv[] = {3, 1, 4};
  for (int i = 0; i < 3; ++i) {
    ps.push_back({"s" + std::to_string(i), ProactiveScore(pv[i]), {}, false});
    gs.push_back({"s" + std::to_string(i), ProactiveScore(gv[i]), {}, false});
  }
  auto m = ev::proactive_metrics(ps, gs);
  double rmse = std::sqrt(((5 - 3) * (5 - 3) + 0.0 + 0.0) / 3.0);
  bool ok = std::abs(*t.precision - p) < kFormulaTol && std::abs(*t.recall - rec) < kFormulaTol &&
            std::abs(*t.f1 - f1) < kFormulaTol && std::abs(*t.f1 - 0.8) < kFormulaTol &&
            std::abs(*t.recall - 0.666667) < 1e-6 && m.acc_p.value() == 1.0 &&
            std::abs(*m.rmse() - std::sqrt(4.0 / 3.0)) < kFormulaTol && std::abs(*m.rmse() - rmse) < kFormulaTol;
  return verdict(ok, "P " + fmt(*t.precision) + ", R " + fmt(*t.recall) + ", F1 " + fmt(*t.f1) + ", acc_p " +
                         fmt(m.acc_p.value()) + ", rmse " + fmt(*m.rmse(), 9));
}

Outcome executor_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  auto fixture = WorldFixture::load(proagent::testing::world_fixture());
  const auto& registry = registry_default();
  auto chain = chainlang::parse_chain(proagent::testing::kExample1Tools);
  auto trace = executor::execute(chain, registry, fixture);
  bool ok = trace.completed() && trace.steps.size() == 4 && trace.steps[1].tool == "get_city_weather" &&
            trace.steps[1].resolved_args ==
                TextArgs{{"city", fixture.location().city}, {"time", "this weekend"}};
  std::size_t checked = 0;
  for (const auto& s : examples().samples) {
    auto t = executor::execute(s.annotation.chain(), registry, fixture);
    if (auto problem = proagent::testing::check_trace_references(s.annotation.chain(), t)) {
      return fail(s.id + ": " + *problem);
    }
    ok = ok && t.completed();
    ++checked;
  }
  double elapsed = seconds_since(t0);
  return verdict(ok && elapsed < kExecutorBudgetS,
                 std::to_string(trace.steps.size()) + " steps, weather args {city: " + fixture.location().city +
                     ", time: this weekend}, reference interpreter agrees on " + std::to_string(checked) +
                     " fixture chains in " + fmt(elapsed, 3) + " s");
}

Outcome validator_mutations() {
  auto dir = scratch("mutations");
  auto records = example_records();
  auto tools_of = [](const json& r) { return json::parse(r.at("Tools").get<std::string>()); };
  struct Mutation {
    std::string name;
    json record;
    std::string expected;
  };
  std::vector<Mutation> mutations;
  {
    auto r = records[3];
    r["Tools"] = records[2]["Tools"];
    mutations.push_back({"score-2-with-tools", r, "ScoreChainMismatch"});
  }
  {
    auto r = records[2];
    auto t = tools_of(r);
    t[1]["name"] = "get_whether";
    r["Tools"] = t.dump();
    mutations.push_back({"unknown tool", r, "UnknownTool"});
  }
  {
    auto r = records[0];
    auto t = tools_of(r);
    std::swap(t[0], t[1]);
    r["Tools"] = t.dump();
    mutations.push_back({"forward reference", r, "ForwardReference"});
  }
  {
    auto r = records[2];
    auto t = tools_of(r);
    t[1]["params"].erase("time");
    r["Tools"] = t.dump();
    mutations.push_back({"missing required param", r, "MissingParam"});
  }
  {
    auto r = records[2];
    auto t = tools_of(r);
    t[1]["params"]["city"] = "$RESULT(get_current_gps_coordinates.city";
    r["Tools"] = t.dump();
    mutations.push_back({"malformed reference", r, "MalformedReference"});
  }

  std::string detail;
  bool ok = true;
  auto clean = invoke({"validate", data("fixtures/examples.jsonl")});
  ok = ok && clean.code == 0;
  detail += "clean exit " + std::to_string(clean.code);
  for (const auto& m : mutations) {
    auto path = dir / "mutant.jsonl";
    std::ofstream(path) << m.record.dump() << "\n";
    auto r = invoke({"validate", path.string(), "--format", "records"});
    std::vector<std::string> kinds;
    if (r.code == 0 || r.code == 1) {
      auto doc = json::parse(r.out);
      for (const auto& d : doc.at("samples").at(0).at("diagnostics")) kinds.push_back(d.at("kind"));
    }
    bool hit = r.code == 1 && kinds == std::vector<std::string>{m.expected};
    ok = ok && hit;
    detail += "; " + m.name + " -> " + (kinds.empty() ? std::string("none") : kinds.front()) +
              (kinds.size() > 1 ? "+" + std::to_string(kinds.size() - 1) : "") + " exit " + std::to_string(r.code);
  }
  fs::remove_all(dir);
  return verdict(ok, detail);
}

Outcome chainlang_round_trip() {
  const auto& registry = registry_default();
  std::size_t fixtures = 0;
  for (const auto& s : examples().samples) {
    const auto& c = s.annotation.chain();
    if (chainlang::parse_chain(chainlang::serialize_chain(c, registry)) != c) return fail(s.id + " does not round trip");
    if (chainlang::parse_chain(s.tools_text) != c) return fail(s.id + " raw text does not reparse");
    ++fixtures;
  }
  std::mt19937_64 rng(500);
  for (int i = 0; i < 500; ++i) {
    auto c = proagent::testing::random_valid_chain(rng, registry);
    if (chainlang::parse_chain(chainlang::serialize_chain(c, registry)) != c) {
      return fail("random chain " + std::to_string(i) + " does not round trip");
    }
  }
  std::size_t inputs = 0;
  std::map<std::string, std::size_t> classes;
  bool agree = true;
  proagent::testing::enumerate_parse_arg_inputs([&](const std::string& input) {
    auto expected = proagent::testing::classify_with_regex(input);
    if (proagent::testing::classify_with_parser(input) != expected) agree = false;
    ++classes[proagent::testing::describe(expected)];
    ++inputs;
  });
  std::string spread;
  for (const auto& [k, n] : classes) spread += (spread.empty() ? "" : ", ") + k + " " + std::to_string(n);
  return verdict(agree && classes.size() == 3,
                 std::to_string(fixtures) + " fixture + 500 random chains round trip; parse_arg agrees on " +
                     std::to_string(inputs) + " inputs (" + spread + ")");
}

Outcome split_determinism() {
  dataset::Dataset d;
  std::vector<std::string> scenarios{"working", "travel", "health", "dining"};
  d.scenarios = scenarios;
  for (std::size_t i = 0; i < 1000; ++i) {
    d.samples.push_back(dataset::make_sample("s" + std::to_string(i),
                                             ContextBundle::from_combined("context " + std::to_string(i)),
                                             PersonaSet{}, AgentOutput::non_proactive("t"), registry_default(),
                                             scenarios[i % scenarios.size()]));
  }
  auto first = dataset::split(d, dataset::RandomRatio{0.6, 42});
  bool same = true;
  for (int run = 0; run < 2; ++run) {
    auto again = dataset::split(d, dataset::RandomRatio{0.6, 42});
    same = same && again.train == first.train && again.test == first.test;
  }
  auto holdout = dataset::split(d, dataset::ScenarioHoldout{{"travel", "dining"}});
  std::size_t leaked = 0;
  for (const auto& s : holdout.train.samples) leaked += (s.scenario == "travel" || s.scenario == "dining");
  bool ok = first.train.samples.size() == 600 && first.test.samples.size() == 400 && same && leaked == 0 &&
            holdout.test.samples.size() == 500;
  return verdict(ok, std::to_string(first.train.samples.size()) + "/" + std::to_string(first.test.samples.size()) +
                         (same ? ", identical across 3 runs" : ", runs differ") + "; held-out samples in train: " +
                         std::to_string(leaked));
}

Outcome level_breakdown() {
  auto truth = ev::ground_truth(examples().samples);
  auto levels = ev::level_breakdown(truth, truth, {});
  std::map<int, std::size_t> counts;
  for (const auto& l : levels) counts[l.level] = l.metrics.n_samples;
  // Independent count of Tools entries per example.
  std::map<int, std::size_t> direct;
  for (const auto& r : example_records()) {
    auto raw = r.at("Tools").get<std::string>();
    std::size_t n = raw == "None" ? 0 : json::parse(raw).size();
    ++direct[n <= 1 ? 1 : n == 2 ? 2 : 3];
  }
  std::string got = std::to_string(counts[1]) + "/" + std::to_string(counts[2]) + "/" + std::to_string(counts[3]);
  std::string raw = std::to_string(direct[1]) + "/" + std::to_string(direct[2]) + "/" + std::to_string(direct[3]);
  bool ok = counts[1] == 3 && counts[2] == 1 && counts[3] == 1;
  return verdict(ok, "expected 3/1/1, got " + got + " (direct count of Tools entries: " + raw + ")");
}

Outcome datagen_closure() {
  auto dir = scratch("datagen");
  auto record = [](const std::string& context, int score, const std::string& scenario = "daily_life") {
    json r{{"Context information", context},
           {"Personas", {"A nurse on rotating night shifts who commutes by bike."}},
           {"Thoughts", "Weather matters for the ride home."},
           {"Proactive score", score},
           {"Scenario", scenario}};
    if (score > 2) {
      r["Tools"] = proagent::testing::kExample3Tools;
      r["Response"] = "Rain is expected after 6 PM, take a jacket.";
    } else {
      r["Tools"] = "None";
      r["Response"] = "None";
    }
    return r;
  };
  auto bad_ref = record("Visual information shows the user checking a bike tyre.", 4);
  bad_ref["Tools"] = R"j([{"name": "get_city_weather", "params": {"city": "$RESULT(get_current_gps_coordinates.city)", "time": "now"}}])j";
  std::vector<std::string> call1 = {
      record("Visual information shows the user unlocking a bike in light rain.", 4).dump(),
      "{\"Context information\": \"truncated",
      record("visual information shows the user unlocking a bike   in light rain.", 4).dump(),
      bad_ref.dump(),
      record("Audio information shows a kettle whistling in a quiet kitchen.", 1).dump(),
  };
  std::vector<std::string> call2 = {
      record(examples().samples[2].context.combined(), 3).dump(),
      record("Visual information shows the user reading on a sofa.", 2).dump(),
      record("Visual information shows the user tying running shoes at the door.", 3).dump(),
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += x + "\n";
    return s;
  };
  auto transcript = dir / "gen_transcript.jsonl";
  {
    std::ofstream out(transcript);
    out << json{{"id", "gen-1"}, {"completion", join(call1)}}.dump() << "\n";
    out << json{{"id", "gen-2"}, {"completion", join(call2)}}.dump() << "\n";
  }
  reasoner::BackendConfig config;
  config.kind = reasoner::BackendKind::Replay;
  config.transcript = transcript;

  dataset::GenerationJob job;
  job.strategy = dataset::ScenarioAware{"daily_life"};
  job.exemplars = examples().samples;
  job.persona_pool = dataset::load_persona_pool(data("personas.txt"));
  job.count = 10;
  job.scenarios = examples().scenarios;
  auto backend = reasoner::make_backend(config);
  auto mixed = dataset::generate(job, *backend, registry_default());

  dataset::Dataset accepted{examples().scenarios, mixed.accepted};
  auto report = dataset::validate(accepted, registry_default());
  std::size_t dups = 0;
  for (const auto& r : mixed.rejected) dups += r.reason == dataset::RejectReason::Duplicate;

  job.strategy = dataset::ScoreAware{1};
  auto backend1 = reasoner::make_backend(config);
  auto score1 = dataset::generate(job, *backend1, registry_default());
  bool only_one = !score1.accepted.empty();
  for (const auto& s : score1.accepted) {
    only_one = only_one && s.annotation.score().value() == 1 && s.annotation.chain().empty();
  }
  fs::remove_all(dir);
  bool ok = !mixed.accepted.empty() && report.ok() && dups == 2 && only_one && !mixed.rejected.empty();
  return verdict(ok, std::to_string(mixed.accepted.size()) + " accepted, " + std::to_string(mixed.rejected.size()) +
                         " rejected (" + std::to_string(dups) + " duplicates), re-validation " +
                         (report.ok() ? "clean" : "dirty") + "; ScoreAware(1) accepted " +
                         std::to_string(score1.accepted.size()) + (only_one ? ", all score 1 with no tools" : ""));
}

Outcome live_smoke() {
  const char* endpoint = std::getenv("PROAGENT_LIVE_ENDPOINT");
  if (!endpoint || !*endpoint) return {Verdict::Skip, "PROAGENT_LIVE_ENDPOINT not set"};
  const char* model = std::getenv("PROAGENT_LIVE_MODEL");
  auto dir = scratch("live");
  json backend{{"kind", "remote"}, {"endpoint", endpoint}, {"model", model ? model : ""}};
  if (const char* key = std::getenv("PROAGENT_API_KEY"); key && *key) backend["credential_env"] = "PROAGENT_API_KEY";
  std::ofstream(dir / "backend.json") << backend.dump();
  auto run = invoke({"run", "--config", data("config/run_replay.json"), "--backend-config",
                     (dir / "backend.json").string(), "--output-dir", dir.string()});
  if (run.code != 0) return fail("run exited " + std::to_string(run.code) + ": " + run.err);
  auto eval = invoke({"eval", "--predictions", (dir / "predictions" / "predictions.jsonl").string(), "--dataset",
                      data("fixtures/examples.jsonl"), "--format", "records"});
  if (eval.code != 0) return fail("eval exited " + std::to_string(eval.code) + ": " + eval.err);
  auto report = ev::report_from_json(json::parse(eval.out));
  return verdict(report.n_samples == 5, "report over " + std::to_string(report.n_samples) + " samples, " +
                                            std::to_string(report.n_prediction_failures) + " prediction failures");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric identity", metric_identity},
      {"oracle round trip", oracle_round_trip},
      {"hand-computed metrics", hand_computed},
      {"executor oracle", executor_oracle},
      {"validator mutation suite", validator_mutations},
      {"chainlang round trip", chainlang_round_trip},
      {"split determinism", split_determinism},
      {"level breakdown", level_breakdown},
      {"datagen closure", datagen_closure},
      {"live-endpoint smoke", live_smoke},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    failures += o.verdict == Verdict::Fail;
    std::cout << tag << " " << i + 1 << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures ? 1 : 0;
}
