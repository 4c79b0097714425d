#pragma once

// Re-derives every resolved argument of a trace directly from earlier trace
// steps, without the executor's result store.

#include <optional>
#include <string>

#include "proagent/executor.hpp"

namespace proagent::testing {

/// Empty when every resolved argument agrees; otherwise a description of
/// the first disagreement.
inline std::optional<std::string> check_trace_references(const ToolChain& chain,
                                                         const executor::ExecutionTrace& trace) {
  for (const auto& step : trace.steps) {
    const auto& call = chain.calls().at(step.index);
    if (step.ok() && step.resolved_args.size() != call.args().size()) {
      return "step " + std::to_string(step.index) + " resolved a different number of args";
    }
    for (std::size_t a = 0; a < step.resolved_args.size(); ++a) {
      const auto& [param, expr] = call.args()[a];
      const auto& [resolved_param, resolved_value] = step.resolved_args[a];
      if (param != resolved_param) return "param order differs at step " + std::to_string(step.index);
      std::string expected;
      if (expr.is_literal()) {
        expected = expr.as_literal().text;
      } else {
        const auto& ref = expr.as_ref();
        std::optional<std::string> found;
        for (std::size_t j = step.index; j-- > 0;) {
          const auto& earlier = trace.steps[j];
          if (earlier.tool == ref.tool_name && earlier.ok()) {
            found = earlier.result().fields.at(ref.field_name);
            break;
          }
        }
        if (!found) return "reference " + ref.tool_name + " has no earlier step";
        expected = *found;
      }
      if (expected != resolved_value) {
        return "step " + std::to_string(step.index) + " param " + param + ": expected '" +
               expected + "', executor resolved '" + resolved_value + "'";
      }
    }
  }
  return std::nullopt;
}

}  // namespace proagent::testing
