#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "proagent/core.hpp"
#include "proagent/toolset.hpp"

namespace proagent::executor {

/// Latest successful result per tool name.
class ResultStore {
 public:
  void record(const std::string& tool, ToolResult result) { entries_[tool] = std::move(result); }
  const ToolResult* find(const std::string& tool) const noexcept;
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::map<std::string, ToolResult, std::less<>> entries_;
};

/// Literal text, or the referenced field of the stored result. Throws
/// UnresolvedReference / FieldMissing.
std::string resolve(const ArgExpr& expr, const ResultStore& store);

struct StepError {
  /// Error code, e.g. "UnresolvedReference" or "SimulatedFailure".
  std::string code;
  std::string message;
  bool operator==(const StepError&) const = default;
};

struct TraceStep {
  std::size_t index = 0;
  std::string tool;
  /// Args resolved so far; may be partial when resolution failed.
  TextArgs resolved_args;
  std::variant<ToolResult, StepError> outcome;

  bool ok() const noexcept { return std::holds_alternative<ToolResult>(outcome); }
  const ToolResult& result() const { return std::get<ToolResult>(outcome); }
  const StepError& error() const { return std::get<StepError>(outcome); }
  bool operator==(const TraceStep&) const = default;
};

struct ExecutionTrace {
  std::vector<TraceStep> steps;
  /// Index of the failing call; empty when every call completed.
  std::optional<std::size_t> aborted_at;

  bool completed() const noexcept { return !aborted_at.has_value(); }
  bool operator==(const ExecutionTrace&) const = default;
};

/// Runs calls in order, resolving every argument before invoking the tool.
/// The first error aborts the run; nothing is thrown.
ExecutionTrace execute(const ToolChain& chain, const ToolRegistry& registry,
                       const WorldFixture& fixture);

nlohmann::ordered_json trace_to_json(const ExecutionTrace& trace);

}  // namespace proagent::executor
