#include <chrono>

#include "proagent/chainlang.hpp"
#include "proagent/reasoner.hpp"

namespace proagent::reasoner {

using nlohmann::ordered_json;

std::string build_synthesis_prompt(const BenchmarkSample& sample, const AgentOutput& output,
                                   const executor::ExecutionTrace& trace) {
  std::string out =
      "You are a proactive assistant on the user's wearable devices. You decided to help the user "
      "without being asked and already ran the tools below. Write one short, friendly message to "
      "the user that uses the tool results. Do not mention tool names. Reply with the message "
      "only.\n\n";
  out += build_runtime_prompt(sample.context, sample.personas);
  out += "\n## Your reasoning\n" + output.thought().value_or("(none)") + "\n";
  out += "\n## Tool results\n" + executor::trace_to_json(trace).dump(2) + "\n";
  return out;
}

std::string template_response(const executor::ExecutionTrace& trace) {
  std::string out;
  for (const auto& step : trace.steps) {
    if (!step.ok()) continue;
    out += out.empty() ? "Here is what I found: " : " ";
    auto text = step.result().text();
    if (!text.empty() && text.back() != '.') text += '.';
    out += text;
  }
  if (trace.aborted_at) {
    const auto& failed = trace.steps.back();
    if (!out.empty()) out += " ";
    out += "I could not finish checking: " + failed.tool + " failed (" + failed.error().code + ").";
  }
  if (out.empty()) out = "I am ready to help if you need anything.";
  return out;
}

namespace {

std::string trim(const std::string& text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

}  // namespace

SampleRun run_sample(const BenchmarkSample& sample, Backend& backend, const ToolRegistry& registry,
                     const WorldFixture& fixture, const RunOptions& options) {
  auto start = std::chrono::steady_clock::now();
  SampleRun run;
  run.id = sample.id;
  auto stamp = [&] {
    run.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return run;
  };

  std::string completion;
  try {
    completion = backend.generate({build_prompt(registry, sample).rendered(), sample.id});
  } catch (const Error& e) {
    run.prediction_failure = true;
    run.backend_error = e.code() + ": " + e.what();
    run.parse_notes = {e.code()};
    return stamp();
  }

  auto parsed = parse_output(completion);
  run.parse_status = parsed.status;
  run.parse_notes = parsed.notes;
  if (parsed.status == ParseStatus::Failed) {
    run.prediction_failure = true;
    run.output = AgentOutput::non_proactive(parsed.thought);
    return stamp();
  }
  const auto& decided = *parsed.output;
  run.output = AgentOutput(decided.thought(), decided.score(), decided.chain(), std::nullopt);
  if (!needs_proactive(decided.score(), options.gate)) return stamp();

  run.chain_diagnostics = chainlang::validate_chain(decided.chain(), registry);
  run.trace = executor::execute(decided.chain(), registry, fixture);

  Backend& synthesis = options.synthesis ? *options.synthesis : backend;
  if (synthesis.kind() != BackendKind::FixedStub) {
    try {
      auto text = trim(synthesis.generate(
          {build_synthesis_prompt(sample, decided, *run.trace), sample.id + "#response"}));
      if (!text.empty()) {
        run.response = std::move(text);
        run.response_source = "backend";
      }
    } catch (const Error&) {
      // Fall through to the template.
    }
  }
  if (!run.response) {
    run.response = template_response(*run.trace);
    run.response_source = "template";
  }
  run.output = AgentOutput(decided.thought(), decided.score(), decided.chain(), run.response);
  return stamp();
}

ordered_json run_to_json(const SampleRun& run, const ToolRegistry& registry) {
  ordered_json notes = run.parse_notes;
  ordered_json diagnostics = ordered_json::array();
  for (const auto& d : run.chain_diagnostics) diagnostics.push_back(format(d));
  ordered_json record{
      {"id", run.id},
      {"score", run.output.score().value()},
      {"tools", chainlang::chain_to_json(run.output.chain(), registry, chainlang::UnknownTools::OmitDesc)},
      {"prediction_failure", run.prediction_failure},
      {"parse_status", std::string(to_string(run.parse_status))},
      {"parse_notes", notes},
      {"backend_error", run.backend_error ? ordered_json(*run.backend_error) : ordered_json(nullptr)},
      {"thought", run.output.thought() ? ordered_json(*run.output.thought()) : ordered_json(nullptr)},
      {"chain_diagnostics", diagnostics},
      {"trace", run.trace ? executor::trace_to_json(*run.trace) : ordered_json(nullptr)},
      {"response", run.response ? ordered_json(*run.response) : ordered_json(nullptr)},
      {"response_source", run.response_source ? ordered_json(*run.response_source) : ordered_json(nullptr)}};
  return record;
}

}  // namespace proagent::reasoner
