#include "proagent/executor.hpp"

namespace proagent::executor {

const ToolResult* ResultStore::find(const std::string& tool) const noexcept {
  auto it = entries_.find(tool);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string resolve(const ArgExpr& expr, const ResultStore& store) {
  if (expr.is_literal()) return expr.as_literal().text;
  const auto& ref = expr.as_ref();
  const auto* result = store.find(ref.tool_name);
  if (!result) {
    throw UnresolvedReference("no completed call of '" + ref.tool_name + "'");
  }
  auto it = result->fields.find(ref.field_name);
  if (it == result->fields.end()) {
    throw FieldMissing("result of '" + ref.tool_name + "' has no field '" + ref.field_name + "'");
  }
  return it->second;
}

ExecutionTrace execute(const ToolChain& chain, const ToolRegistry& registry,
                       const WorldFixture& fixture) {
  ExecutionTrace trace;
  ResultStore store;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& call = chain.calls()[i];
    TraceStep step;
    step.index = i;
    step.tool = call.name();
    try {
      for (const auto& [param, expr] : call.args()) {
        step.resolved_args.emplace_back(param, resolve(expr, store));
      }
      auto result = invoke(registry, fixture, call.name(), step.resolved_args);
      store.record(call.name(), result);
      step.outcome = std::move(result);
    } catch (const Error& e) {
      step.outcome = StepError{e.code(), e.what()};
    }
    bool failed = !step.ok();
    trace.steps.push_back(std::move(step));
    if (failed) {
      trace.aborted_at = i;
      break;
    }
  }
  return trace;
}

nlohmann::ordered_json trace_to_json(const ExecutionTrace& trace) {
  using nlohmann::ordered_json;
  ordered_json steps = ordered_json::array();
  for (const auto& step : trace.steps) {
    ordered_json args = ordered_json::object();
    for (const auto& [name, value] : step.resolved_args) args[name] = value;
    ordered_json entry{{"index", step.index}, {"tool", step.tool}, {"args", args}};
    if (step.ok()) {
      entry["result"] = step.result().fields;
    } else {
      entry["error"] = {{"code", step.error().code}, {"message", step.error().message}};
    }
    steps.push_back(std::move(entry));
  }
  ordered_json status = trace.completed() ? ordered_json("completed")
                                          : ordered_json{{"aborted_at", *trace.aborted_at}};
  return ordered_json{{"status", status}, {"steps", steps}};
}

}  // namespace proagent::executor
