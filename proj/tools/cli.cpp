#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "proagent/chainlang.hpp"
#include "proagent/dataset.hpp"
#include "proagent/evalsuite.hpp"

namespace proagent::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

fs::path resolve_path(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DecodeError(path.string() + ": not valid JSON");
  return doc;
}

reasoner::BackendConfig backend_from(const json& value, const fs::path& base) {
  if (value.is_string()) return reasoner::BackendConfig::load(resolve_path(value.get<std::string>(), base));
  return reasoner::BackendConfig::from_json(value, base);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

ToolRegistry load_registry(const fs::path& path) {
  return path.empty() ? registry_default() : ToolRegistry::load(path);
}

std::string render_call(const ToolCall& call) {
  std::string out = call.name() + "(";
  for (std::size_t i = 0; i < call.args().size(); ++i) {
    if (i) out += ", ";
    out += call.args()[i].first + "=" + chainlang::render_arg(call.args()[i].second);
  }
  return out + ")";
}

std::string render_args(const TextArgs& args) {
  std::string out;
  for (const auto& [k, v] : args) {
    if (!out.empty()) out += ", ";
    out += k + "=" + v;
  }
  return out;
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

evalsuite::Prediction prediction_of(const reasoner::SampleRun& run) {
  return {run.id, run.output.score(), run.output.chain(), run.prediction_failure};
}

// Runs every sample with up to `parallelism` workers; results keep input order.
std::vector<reasoner::SampleRun> run_all(const std::vector<BenchmarkSample>& samples,
                                         reasoner::Backend& backend, const ToolRegistry& registry,
                                         const WorldFixture& fixture, const reasoner::RunOptions& options,
                                         std::size_t parallelism) {
  std::vector<reasoner::SampleRun> runs(samples.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < samples.size(); i = next++) {
      runs[i] = reasoner::run_sample(samples[i], backend, registry, fixture, options);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < std::min(parallelism, samples.size()); ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return runs;
}

// ------------------------------------------------------------- commands

int cmd_validate(const fs::path& dataset_path, const fs::path& registry_path, const std::string& format,
                 std::ostream& out) {
  auto report = dataset::validate_file(dataset_path, load_registry(registry_path));
  if (format == "records") {
    out << dataset::report_to_json(report).dump() << "\n";
  } else {
    out << dataset::render_report(report);
  }
  return report.ok() ? kExitOk : kExitDiagnostics;
}

int cmd_run(RunConfig config, bool dump_config, std::ostream& out) {
  config.check();
  if (dump_config) {
    out << config.to_json().dump(2) << "\n";
    return kExitOk;
  }
  auto registry = load_registry(config.registry);
  auto fixture = WorldFixture::load(config.fixture);
  auto data = dataset::load(config.dataset);
  auto backend = reasoner::make_backend(config.backend);
  std::unique_ptr<reasoner::Backend> synthesis;
  if (config.synthesis) synthesis = reasoner::make_backend(*config.synthesis);
  reasoner::RunOptions options{GateConfig(config.gate_threshold), synthesis.get()};

  auto started = utc_now();
  auto t0 = std::chrono::steady_clock::now();
  auto runs = run_all(data.samples, *backend, registry, fixture, options, config.parallelism);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

  std::vector<evalsuite::Prediction> predictions;
  std::string traces;
  ordered_json timings = ordered_json::object();
  std::size_t failures = 0, executed = 0, aborted = 0, backend_errors = 0;
  std::map<std::string, std::size_t> parse_counts;
  for (const auto& run : runs) {
    predictions.push_back(prediction_of(run));
    traces += reasoner::run_to_json(run, registry).dump() + "\n";
    timings[run.id] = run.elapsed.count();
    failures += run.prediction_failure;
    backend_errors += run.backend_error.has_value();
    ++parse_counts[std::string(reasoner::to_string(run.parse_status))];
    if (run.trace) {
      ++executed;
      aborted += !run.trace->completed();
    }
  }

  fs::create_directories(config.output_dir / "predictions");
  evalsuite::save_predictions(config.output_dir / "predictions" / "predictions.jsonl", predictions, registry);
  write_text(config.output_dir / "traces" / "traces.jsonl", traces);
  ordered_json report{
      {"header", {{"started_at", started}, {"elapsed_ms", elapsed.count()}, {"sample_elapsed_ms", timings}}},
      {"config", config.to_json()},
      {"summary",
       {{"n_samples", runs.size()},
        {"prediction_failures", failures},
        {"backend_errors", backend_errors},
        {"parse_status", parse_counts},
        {"executed", executed},
        {"aborted", aborted}}}};
  write_text(config.output_dir / "reports" / "run.json", report.dump(2) + "\n");

  out << "samples: " << runs.size() << "  prediction failures: " << failures << "  executed: " << executed
      << "  aborted: " << aborted << "\n";
  out << "wrote " << (config.output_dir / "predictions" / "predictions.jsonl").string() << "\n";
  return kExitOk;
}

struct EvalFlags {
  fs::path predictions;
  fs::path dataset;
  int boundary = kProactiveBoundary;
  bool micro = false;
  bool tool_args = false;
  bool levels = false;
  std::string format = "table";
  fs::path output;
};

int cmd_eval(const EvalFlags& flags, std::ostream& out) {
  auto predictions = evalsuite::load_predictions(flags.predictions);
  auto data = dataset::load(flags.dataset);
  auto truth = evalsuite::ground_truth(data.samples);
  evalsuite::Options options;
  options.boundary = flags.boundary;
  options.averaging = flags.micro ? evalsuite::Averaging::Micro : evalsuite::Averaging::Macro;
  options.args_granularity = flags.tool_args ? evalsuite::ArgsGranularity::Tool : evalsuite::ArgsGranularity::Sample;
  options.levels = flags.levels;
  auto report = evalsuite::evaluate(predictions, truth, options);
  auto doc = evalsuite::report_to_json(report);
  if (!flags.output.empty()) write_text(flags.output, doc.dump(2) + "\n");
  if (flags.format == "records") {
    out << doc.dump() << "\n";
  } else {
    out << evalsuite::render_table(report);
  }
  return kExitOk;
}

int cmd_split(const fs::path& dataset_path, double ratio, std::uint64_t seed,
              const std::vector<std::string>& holdout, const fs::path& out_dir, std::ostream& out) {
  auto data = dataset::load(dataset_path);
  dataset::SplitMode mode = holdout.empty() ? dataset::SplitMode{dataset::RandomRatio{ratio, seed}}
                                            : dataset::SplitMode{dataset::ScenarioHoldout{holdout}};
  auto parts = dataset::split(data, mode);
  fs::create_directories(out_dir);
  dataset::save(out_dir / "train.jsonl", parts.train);
  dataset::save(out_dir / "test.jsonl", parts.test);
  out << "train: " << parts.train.samples.size() << "  test: " << parts.test.samples.size() << "\n";
  return kExitOk;
}

struct GenFlags {
  fs::path backend;
  fs::path exemplars;
  fs::path personas;
  fs::path registry;
  std::string scenario;
  int score = 0;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::size_t parallelism = 1;
  std::string id_prefix = "gen";
  fs::path output;
  fs::path rejected;
};

int cmd_gen(const GenFlags& flags, std::ostream& out) {
  if (flags.scenario.empty() == (flags.score == 0)) {
    throw ConfigError("give exactly one of --scenario or --score");
  }
  auto registry = load_registry(flags.registry);
  auto exemplars = dataset::load(flags.exemplars);
  dataset::GenerationJob job;
  if (flags.scenario.empty()) {
    job.strategy = dataset::ScoreAware{flags.score};
  } else {
    job.strategy = dataset::ScenarioAware{flags.scenario};
  }
  job.exemplars = exemplars.samples;
  job.scenarios = exemplars.scenarios;
  if (!flags.personas.empty()) job.persona_pool = dataset::load_persona_pool(flags.personas);
  job.count = flags.count;
  job.seed = flags.seed;
  job.attempt_budget = flags.budget;
  job.parallelism = flags.parallelism;
  job.id_prefix = flags.id_prefix;
  job.check();
  auto backend = reasoner::make_backend(reasoner::BackendConfig::load(flags.backend));
  auto result = dataset::generate(job, *backend, registry);

  dataset::save(flags.output, dataset::Dataset{exemplars.scenarios, result.accepted});
  if (!flags.rejected.empty()) {
    std::string lines;
    for (const auto& r : result.rejected) {
      ordered_json rec{{"call", r.call},
                       {"candidate", r.candidate},
                       {"reason", dataset::to_string(r.reason)},
                       {"detail", r.detail},
                       {"raw", r.raw}};
      lines += rec.dump() + "\n";
    }
    write_text(flags.rejected, lines);
  }
  out << "status: " << dataset::to_string(result.status) << "  accepted: " << result.accepted.size()
      << "  rejected: " << result.rejected.size() << "  calls: " << result.calls << "\n";
  if (!result.stop_reason.empty()) out << "stopped: " << result.stop_reason << "\n";
  switch (result.status) {
    case dataset::GenerationStatus::Complete: return kExitOk;
    case dataset::GenerationStatus::AttemptBudgetExhausted: return kExitDiagnostics;
    case dataset::GenerationStatus::BackendUnavailable: return kExitFailure;
  }
  return kExitFailure;
}

int cmd_export_sft(const fs::path& dataset_path, const fs::path& registry_path, const fs::path& output,
                   std::ostream& out) {
  auto records = dataset::export_sft(dataset::load(dataset_path), load_registry(registry_path));
  dataset::write_sft(output, records);
  out << "wrote " << records.size() << " records to " << output.string() << "\n";
  return kExitOk;
}

int cmd_stats(const fs::path& dataset_path, const std::string& format, std::ostream& out) {
  auto s = dataset::stats(dataset::load(dataset_path));
  if (format == "records") {
    out << dataset::stats_to_json(s).dump() << "\n";
  } else {
    out << dataset::render_stats(s);
  }
  return kExitOk;
}

struct InferFlags {
  fs::path dataset;
  std::string id;
  std::string context;
  std::vector<std::string> personas;
  fs::path backend;
  fs::path registry;
  fs::path fixture;
  int gate = GateConfig::kDefaultThreshold;
  std::string format = "table";
};

int cmd_infer(const InferFlags& flags, std::ostream& out) {
  auto registry = load_registry(flags.registry);
  BenchmarkSample sample;
  if (!flags.dataset.empty()) {
    if (flags.id.empty()) throw ConfigError("--id is required with --dataset");
    auto data = dataset::load(flags.dataset);
    auto it = std::find_if(data.samples.begin(), data.samples.end(),
                           [&](const BenchmarkSample& s) { return s.id == flags.id; });
    if (it == data.samples.end()) throw ConfigError("no sample '" + flags.id + "' in " + flags.dataset.string());
    sample = *it;
  } else if (!flags.context.empty()) {
    sample.id = flags.id.empty() ? "adhoc" : flags.id;
    sample.context = ContextBundle::from_combined(flags.context);
    sample.personas = PersonaSet(flags.personas);
  } else {
    throw ConfigError("give --dataset and --id, or --context");
  }
  auto fixture = flags.fixture.empty() ? WorldFixture{} : WorldFixture::load(flags.fixture);
  auto backend = reasoner::make_backend(reasoner::BackendConfig::load(flags.backend));
  auto run = reasoner::run_sample(sample, *backend, registry, fixture, {GateConfig(flags.gate), nullptr});

  if (flags.format == "records") {
    out << reasoner::run_to_json(run, registry).dump() << "\n";
    return kExitOk;
  }
  out << "id: " << run.id << "\n";
  out << "thought: " << run.output.thought().value_or("") << "\n";
  out << "score: " << run.output.score().value() << "\n";
  out << "parse: " << reasoner::to_string(run.parse_status);
  for (const auto& note : run.parse_notes) out << "; " << note;
  out << "\n";
  if (run.backend_error) out << "backend error: " << *run.backend_error << "\n";
  out << "chain:" << (run.output.chain().empty() ? " none" : "") << "\n";
  for (std::size_t i = 0; i < run.output.chain().size(); ++i) {
    out << "  " << i + 1 << ". " << render_call(run.output.chain().calls()[i]) << "\n";
  }
  for (const auto& d : run.chain_diagnostics) out << "  ! " << format(d) << "\n";
  if (run.trace) {
    out << "trace:\n";
    for (const auto& step : run.trace->steps) {
      out << "  " << step.index + 1 << ". " << step.tool << "(" << render_args(step.resolved_args) << ") -> ";
      if (step.ok()) {
        out << step.result().text() << "\n";
      } else {
        out << "error " << step.error().code << ": " << step.error().message << "\n";
      }
    }
  } else {
    out << "trace: not executed\n";
  }
  out << "response: " << run.response.value_or("None");
  if (run.response_source) out << " [" << *run.response_source << "]";
  out << "\n";
  return kExitOk;
}

int cmd_tools(const fs::path& registry_path, const std::string& format, std::ostream& out) {
  auto registry = load_registry(registry_path);
  if (format == "records") {
    for (const auto& t : registry.tools()) {
      ordered_json params = ordered_json::array();
      for (const auto& p : t.params) params.push_back({{"name", p.name}, {"required", p.required}});
      out << ordered_json{{"name", t.name}, {"params", params}, {"output_fields", t.output_fields}}.dump() << "\n";
    }
    return kExitOk;
  }
  std::size_t width = 4;
  for (const auto& t : registry.tools()) width = std::max(width, t.name.size());
  out << pad("name", width) << "  params\n";
  for (const auto& t : registry.tools()) {
    std::string params;
    for (const auto& p : t.params) {
      if (!params.empty()) params += ", ";
      params += p.name + (p.required ? "" : "?");
    }
    out << pad(t.name, width) << "  " << (params.empty() ? "-" : params) << "\n";
  }
  return kExitOk;
}

int cmd_transcript(const fs::path& dataset_path, const fs::path& registry_path, const fs::path& output,
                   std::ostream& out) {
  auto data = dataset::load(dataset_path);
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  reasoner::write_ground_truth_transcript(output, data.samples, load_registry(registry_path));
  out << "wrote " << output.string() << "\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  static const std::set<std::string> diagnostics = {"IdMismatch", "ValidationFailed"};
  return diagnostics.count(e.code()) ? kExitDiagnostics : kExitFailure;
}

}  // namespace

void RunConfig::check() const {
  if (dataset.empty() || !fs::exists(dataset)) throw ConfigError("dataset not found: " + dataset.string());
  if (!registry.empty() && !fs::exists(registry)) throw ConfigError("registry not found: " + registry.string());
  if (fixture.empty() || !fs::exists(fixture)) throw ConfigError("fixture not found: " + fixture.string());
  if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
  GateConfig{gate_threshold};
  backend.check();
  if (synthesis) synthesis->check();
}

RunConfig RunConfig::from_json(const json& doc, const fs::path& base_dir) {
  try {
    RunConfig c;
    c.dataset = resolve_path(doc.at("dataset").get<std::string>(), base_dir);
    c.registry = resolve_path(doc.value("registry", ""), base_dir);
    c.fixture = resolve_path(doc.at("fixture").get<std::string>(), base_dir);
    c.backend = backend_from(doc.at("backend"), base_dir);
    if (doc.contains("synthesis_backend")) c.synthesis = backend_from(doc.at("synthesis_backend"), base_dir);
    c.gate_threshold = doc.value("gate_threshold", c.gate_threshold);
    auto parallelism = doc.value("parallelism", 1);
    if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
    c.parallelism = static_cast<std::size_t>(parallelism);
    c.output_dir = resolve_path(doc.value("output_dir", "out"), base_dir);
    c.seed = doc.value("seed", std::uint64_t{0});
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

RunConfig RunConfig::load(const fs::path& path) {
  return from_json(read_json_file(path), path.parent_path());
}

ordered_json RunConfig::to_json() const {
  ordered_json doc{{"dataset", dataset.string()},
                   {"registry", registry.string()},
                   {"fixture", fixture.string()},
                   {"backend", backend.to_json()}};
  if (synthesis) doc["synthesis_backend"] = synthesis->to_json();
  doc["gate_threshold"] = gate_threshold;
  doc["parallelism"] = parallelism;
  doc["output_dir"] = output_dir.string();
  doc["seed"] = seed;
  return doc;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Runtime and benchmark harness for proactive agents", "proagent"};
  app.require_subcommand(1);
  std::string format = "table";
  auto format_check = CLI::IsMember({"table", "records"});

  fs::path registry;
  auto* validate = app.add_subcommand("validate", "Check a dataset against the schema and tool registry");
  fs::path validate_path;
  validate->add_option("dataset", validate_path, "Dataset file")->required();
  validate->add_option("--registry", registry, "Tool registry config");
  validate->add_option("--format", format, "table or records")->check(format_check);

  auto* run = app.add_subcommand("run", "Run the agent over every sample of a dataset");
  fs::path run_config_path, run_dataset, run_backend, run_output;
  std::optional<std::size_t> run_parallelism;
  std::optional<int> run_gate;
  bool dump_config = false;
  run->add_option("--config", run_config_path, "Run config file")->required();
  run->add_option("--dataset", run_dataset, "Override the dataset");
  run->add_option("--backend-config", run_backend, "Override the backend config");
  run->add_option("--output-dir", run_output, "Override the output directory");
  run->add_option("--parallelism", run_parallelism, "Concurrent samples");
  run->add_option("--gate", run_gate, "Gate threshold (2-5)");
  run->add_flag("--dump-config", dump_config, "Print the resolved config and exit");

  auto* eval = app.add_subcommand("eval", "Score predictions against a dataset");
  EvalFlags eval_flags;
  eval->add_option("--predictions", eval_flags.predictions, "Prediction file")->required();
  eval->add_option("--dataset", eval_flags.dataset, "Ground-truth dataset")->required();
  eval->add_option("--boundary", eval_flags.boundary, "Proactive decision boundary");
  eval->add_flag("--micro", eval_flags.micro, "Micro-average precision, recall and F1");
  eval->add_flag("--tool-args", eval_flags.tool_args, "Score arguments per matched tool");
  eval->add_flag("--levels", eval_flags.levels, "Add per-level sub-reports");
  eval->add_option("--format", format, "table or records")->check(format_check);
  eval->add_option("--output", eval_flags.output, "Also write the JSON report here");

  auto* split = app.add_subcommand("split", "Split a dataset into train and test files");
  fs::path split_path, split_out = ".";
  double ratio = 0.6;
  std::uint64_t split_seed = 0;
  std::vector<std::string> holdout;
  split->add_option("dataset", split_path, "Dataset file")->required();
  auto* ratio_opt = split->add_option("--ratio", ratio, "Train fraction")->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--holdout", holdout, "Scenarios held out for test")->delimiter(',')->excludes(ratio_opt);
  split->add_option("--out-dir", split_out, "Directory for train.jsonl and test.jsonl");

  auto* gen = app.add_subcommand("gen", "Generate samples with a backend");
  GenFlags gen_flags;
  gen->add_option("--backend-config", gen_flags.backend, "Backend config")->required();
  gen->add_option("--exemplars", gen_flags.exemplars, "Exemplar dataset")->required();
  gen->add_option("--personas", gen_flags.personas, "Persona pool, one per line");
  gen->add_option("--registry", gen_flags.registry, "Tool registry config");
  gen->add_option("--scenario", gen_flags.scenario, "Scenario-aware target label");
  gen->add_option("--score", gen_flags.score, "Score-aware target score")->check(CLI::Range(1, 5));
  gen->add_option("--count", gen_flags.count, "Samples to accept");
  gen->add_option("--seed", gen_flags.seed, "Prompt sampling seed");
  gen->add_option("--budget", gen_flags.budget, "Candidates to examine (0: 5 x count)");
  gen->add_option("--parallelism", gen_flags.parallelism, "Concurrent backend calls");
  gen->add_option("--id-prefix", gen_flags.id_prefix, "Prefix for accepted ids");
  gen->add_option("--output", gen_flags.output, "Accepted samples")->required();
  gen->add_option("--rejected", gen_flags.rejected, "Rejected candidates");

  auto* sft = app.add_subcommand("export-sft", "Write (input, thought, target) training records");
  fs::path sft_path, sft_out;
  sft->add_option("dataset", sft_path, "Dataset file")->required();
  sft->add_option("--output", sft_out, "SFT record file")->required();
  sft->add_option("--registry", registry, "Tool registry config");

  auto* stats = app.add_subcommand("stats", "Summarize a dataset");
  fs::path stats_path;
  stats->add_option("dataset", stats_path, "Dataset file")->required();
  stats->add_option("--format", format, "table or records")->check(format_check);

  auto* infer = app.add_subcommand("infer", "Run the agent on one sample and print every stage");
  InferFlags infer_flags;
  infer->add_option("--dataset", infer_flags.dataset, "Dataset holding the sample");
  infer->add_option("--id", infer_flags.id, "Sample id");
  infer->add_option("--context", infer_flags.context, "Context text for an ad-hoc sample");
  infer->add_option("--persona", infer_flags.personas, "Persona statement (repeatable)");
  infer->add_option("--backend-config", infer_flags.backend, "Backend config")->required();
  infer->add_option("--registry", infer_flags.registry, "Tool registry config");
  infer->add_option("--fixture", infer_flags.fixture, "World fixture");
  infer->add_option("--gate", infer_flags.gate, "Gate threshold (2-5)");
  infer->add_option("--format", format, "table or records")->check(format_check);

  auto* tools = app.add_subcommand("tools", "List the tool registry");
  tools->add_option("--registry", registry, "Tool registry config");
  tools->add_option("--format", format, "table or records")->check(format_check);

  auto* transcript = app.add_subcommand("transcript", "Write a replay transcript of the annotations");
  fs::path transcript_path, transcript_out;
  transcript->add_option("dataset", transcript_path, "Dataset file")->required();
  transcript->add_option("--output", transcript_out, "Transcript file")->required();
  transcript->add_option("--registry", registry, "Tool registry config");

  std::vector<const char*> argv{"proagent"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    auto code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_path, registry, format, out);
    if (run->parsed()) {
      auto config = RunConfig::load(run_config_path);
      if (!run_dataset.empty()) config.dataset = run_dataset;
      if (!run_backend.empty()) config.backend = reasoner::BackendConfig::load(run_backend);
      if (!run_output.empty()) config.output_dir = run_output;
      if (run_parallelism) config.parallelism = *run_parallelism;
      if (run_gate) config.gate_threshold = *run_gate;
      return cmd_run(std::move(config), dump_config, out);
    }
    if (eval->parsed()) {
      eval_flags.format = format;
      return cmd_eval(eval_flags, out);
    }
    if (split->parsed()) return cmd_split(split_path, ratio, split_seed, holdout, split_out, out);
    if (gen->parsed()) return cmd_gen(gen_flags, out);
    if (sft->parsed()) return cmd_export_sft(sft_path, registry, sft_out, out);
    if (stats->parsed()) return cmd_stats(stats_path, format, out);
    if (infer->parsed()) {
      infer_flags.format = format;
      return cmd_infer(infer_flags, out);
    }
    if (tools->parsed()) return cmd_tools(registry, format, out);
    if (transcript->parsed()) return cmd_transcript(transcript_path, registry, transcript_out, out);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace proagent::cli
