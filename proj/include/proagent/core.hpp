#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "proagent/error.hpp"

namespace proagent {

/// True for `[A-Za-z_][A-Za-z0-9_]*`.
bool is_identifier(std::string_view text) noexcept;

/// Throws InvalidIdentifier unless `text` is an identifier.
std::string require_identifier(std::string_view text, std::string_view what);

/// Sensory context: visual, audio and notification digests plus the rendered
/// combination handed to the reasoner.
class ContextBundle {
 public:
  ContextBundle() = default;

  /// Wraps an already-combined context (dataset samples store only this).
  static ContextBundle from_combined(std::string combined);

  const std::optional<std::string>& visual() const noexcept { return visual_; }
  const std::optional<std::string>& audio() const noexcept { return audio_; }
  const std::optional<std::string>& notifications() const noexcept {
    return notifications_;
  }
  const std::string& combined() const noexcept { return combined_; }

  bool operator==(const ContextBundle&) const = default;

 private:
  friend ContextBundle assemble_context(std::optional<std::string>,
                                        std::optional<std::string>,
                                        std::optional<std::string>);

  std::optional<std::string> visual_;
  std::optional<std::string> audio_;
  std::optional<std::string> notifications_;
  std::string combined_;
};

inline constexpr std::string_view kVisualPrefix = "Visual information: ";
inline constexpr std::string_view kAudioPrefix = "Audio information: ";
inline constexpr std::string_view kNotificationPrefix = "Notification: ";

/// Renders the present parts, one per line, in the order visual, audio,
/// notifications. Throws AllPartsMissing when every part is absent.
ContextBundle assemble_context(std::optional<std::string> visual,
                               std::optional<std::string> audio,
                               std::optional<std::string> notifications);

class PersonaSet {
 public:
  PersonaSet() = default;
  /// Throws InvariantViolation on a blank entry.
  explicit PersonaSet(std::vector<std::string> entries);

  const std::vector<std::string>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  bool operator==(const PersonaSet&) const = default;

 private:
  std::vector<std::string> entries_;
};

class ProactiveScore {
 public:
  /// Throws InvalidScore outside [1, 5].
  explicit ProactiveScore(int value);

  int value() const noexcept { return value_; }

  auto operator<=>(const ProactiveScore&) const = default;

 private:
  int value_;
};

class GateConfig {
 public:
  static constexpr int kDefaultThreshold = 3;

  GateConfig() = default;
  /// Throws InvalidThreshold outside [2, 5].
  explicit GateConfig(int threshold);

  int threshold() const noexcept { return threshold_; }

 private:
  int threshold_ = kDefaultThreshold;
};

/// Ground-truth binarization boundary used by the metrics.
inline constexpr int kProactiveBoundary = 3;

bool needs_proactive(ProactiveScore score, GateConfig gate) noexcept;

struct Literal {
  std::string text;
  bool operator==(const Literal&) const = default;
};

struct ResultRef {
  std::string tool_name;
  std::string field_name;
  bool operator==(const ResultRef&) const = default;
};

/// A tool argument: literal text or a reference to an earlier tool's result.
class ArgExpr {
 public:
  static ArgExpr literal(std::string text);
  /// Throws InvalidIdentifier if either part is not an identifier.
  static ArgExpr result_ref(std::string tool_name, std::string field_name);

  bool is_literal() const noexcept { return std::holds_alternative<Literal>(value_); }
  bool is_ref() const noexcept { return std::holds_alternative<ResultRef>(value_); }
  const Literal& as_literal() const { return std::get<Literal>(value_); }
  const ResultRef& as_ref() const { return std::get<ResultRef>(value_); }
  const std::variant<Literal, ResultRef>& value() const noexcept { return value_; }

  bool operator==(const ArgExpr&) const = default;

 private:
  explicit ArgExpr(std::variant<Literal, ResultRef> value) : value_(std::move(value)) {}

  std::variant<Literal, ResultRef> value_;
};

using ArgList = std::vector<std::pair<std::string, ArgExpr>>;

class ToolCall {
 public:
  /// Throws InvalidIdentifier for a bad name and InvariantViolation for a
  /// repeated param name.
  ToolCall(std::string name, ArgList args = {});

  const std::string& name() const noexcept { return name_; }
  const ArgList& args() const noexcept { return args_; }
  const ArgExpr* find_arg(std::string_view param) const noexcept;

  bool operator==(const ToolCall&) const = default;

 private:
  std::string name_;
  ArgList args_;
};

/// Ordered tool calls. Reference ordering is checked by chainlang's
/// validator, not here, so that unvalidated chains stay representable.
class ToolChain {
 public:
  ToolChain() = default;
  explicit ToolChain(std::vector<ToolCall> calls) : calls_(std::move(calls)) {}

  const std::vector<ToolCall>& calls() const noexcept { return calls_; }
  bool empty() const noexcept { return calls_.empty(); }
  std::size_t size() const noexcept { return calls_.size(); }

  /// True when every ResultRef in call k names a tool called before k.
  bool references_well_ordered() const noexcept;

  bool operator==(const ToolChain&) const = default;

 private:
  std::vector<ToolCall> calls_;
};

class AgentOutput {
 public:
  /// Throws InvariantViolation when score <= 2 and a chain or response is
  /// present.
  AgentOutput(std::optional<std::string> thought, ProactiveScore score, ToolChain chain,
              std::optional<std::string> response);

  /// The conservative fallback for unparseable completions: score 1, no tools.
  static AgentOutput non_proactive(std::optional<std::string> thought = std::nullopt);

  const std::optional<std::string>& thought() const noexcept { return thought_; }
  ProactiveScore score() const noexcept { return score_; }
  const ToolChain& chain() const noexcept { return chain_; }
  const std::optional<std::string>& response() const noexcept { return response_; }

  bool operator==(const AgentOutput&) const = default;

 private:
  std::optional<std::string> thought_;
  ProactiveScore score_;
  ToolChain chain_;
  std::optional<std::string> response_;
};

struct BenchmarkSample {
  std::string id;
  ContextBundle context;
  PersonaSet personas;
  AgentOutput annotation = AgentOutput::non_proactive();
  std::optional<std::string> scenario;
  std::vector<std::string> media;
  /// The "Tools" field exactly as stored, kept for byte-stable re-serialization.
  std::string tools_text;

  bool operator==(const BenchmarkSample&) const = default;
};

}  // namespace proagent
