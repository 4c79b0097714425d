#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proagent {

enum class DiagnosticKind {
  // Tool arguments.
  MissingParam,
  UnknownParam,
  // Chain structure.
  UnknownTool,
  ForwardReference,
  UnboundReference,
  UnknownField,
  MalformedReference,
  // Record schema.
  DecodeError,
  MissingRecordField,
  UnknownRecordField,
  InvalidFieldType,
  ScoreOutOfRange,
  ScoreChainMismatch,
  BlankPersona,
  EmptyContext,
  UnknownScenario,
  MediaMissing,
  DuplicateId,
};

std::string_view to_string(DiagnosticKind kind) noexcept;

struct Diagnostic {
  DiagnosticKind kind;
  /// Index of the offending call within a chain, when applicable.
  std::optional<std::size_t> call_index;
  /// Param, field or tool name the diagnostic is about (may be empty).
  std::string subject;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

/// One-line rendering, e.g. "call 1: MissingParam(time): ...".
std::string format(const Diagnostic& diagnostic);

}  // namespace proagent
