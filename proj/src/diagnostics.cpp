#include "proagent/diagnostics.hpp"

namespace proagent {

std::string_view to_string(DiagnosticKind kind) noexcept {
  switch (kind) {
    case DiagnosticKind::MissingParam: return "MissingParam";
    case DiagnosticKind::UnknownParam: return "UnknownParam";
    case DiagnosticKind::UnknownTool: return "UnknownTool";
    case DiagnosticKind::ForwardReference: return "ForwardReference";
    case DiagnosticKind::UnboundReference: return "UnboundReference";
    case DiagnosticKind::UnknownField: return "UnknownField";
    case DiagnosticKind::MalformedReference: return "MalformedReference";
    case DiagnosticKind::DecodeError: return "DecodeError";
    case DiagnosticKind::MissingRecordField: return "MissingRecordField";
    case DiagnosticKind::UnknownRecordField: return "UnknownRecordField";
    case DiagnosticKind::InvalidFieldType: return "InvalidFieldType";
    case DiagnosticKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case DiagnosticKind::ScoreChainMismatch: return "ScoreChainMismatch";
    case DiagnosticKind::BlankPersona: return "BlankPersona";
    case DiagnosticKind::EmptyContext: return "EmptyContext";
    case DiagnosticKind::UnknownScenario: return "UnknownScenario";
    case DiagnosticKind::MediaMissing: return "MediaMissing";
    case DiagnosticKind::DuplicateId: return "DuplicateId";
  }
  return "Unknown";
}

std::string format(const Diagnostic& diagnostic) {
  std::string out;
  if (diagnostic.call_index) {
    out += "call " + std::to_string(*diagnostic.call_index) + ": ";
  }
  out += to_string(diagnostic.kind);
  if (!diagnostic.subject.empty()) out += "(" + diagnostic.subject + ")";
  if (!diagnostic.message.empty()) out += ": " + diagnostic.message;
  return out;
}

}  // namespace proagent
