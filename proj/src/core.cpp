#include "proagent/core.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace proagent {

bool is_identifier(std::string_view text) noexcept {
  if (text.empty()) return false;
  auto head = static_cast<unsigned char>(text.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(text.begin() + 1, text.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

std::string require_identifier(std::string_view text, std::string_view what) {
  if (!is_identifier(text)) {
    throw InvalidIdentifier(std::string(what) + " '" + std::string(text) +
                            "' is not an identifier");
  }
  return std::string(text);
}

ContextBundle ContextBundle::from_combined(std::string combined) {
  ContextBundle bundle;
  bundle.combined_ = std::move(combined);
  return bundle;
}

ContextBundle assemble_context(std::optional<std::string> visual,
                               std::optional<std::string> audio,
                               std::optional<std::string> notifications) {
  if (!visual && !audio && !notifications) {
    throw AllPartsMissing("at least one of visual, audio or notifications is required");
  }
  ContextBundle bundle;
  std::string combined;
  auto append = [&combined](std::string_view prefix, const std::optional<std::string>& part) {
    if (!part) return;
    if (!combined.empty()) combined += '\n';
    combined += prefix;
    combined += *part;
  };
  append(kVisualPrefix, visual);
  append(kAudioPrefix, audio);
  append(kNotificationPrefix, notifications);

  bundle.visual_ = std::move(visual);
  bundle.audio_ = std::move(audio);
  bundle.notifications_ = std::move(notifications);
  bundle.combined_ = std::move(combined);
  return bundle;
}

namespace {

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

PersonaSet::PersonaSet(std::vector<std::string> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (is_blank(entries_[i])) {
      throw InvariantViolation("persona entry " + std::to_string(i) + " is blank");
    }
  }
}

ProactiveScore::ProactiveScore(int value) : value_(value) {
  if (value < 1 || value > 5) {
    throw InvalidScore("proactive score must be in [1, 5], got " + std::to_string(value));
  }
}

GateConfig::GateConfig(int threshold) : threshold_(threshold) {
  if (threshold < 2 || threshold > 5) {
    throw InvalidThreshold("gate threshold must be in [2, 5], got " + std::to_string(threshold));
  }
}

bool needs_proactive(ProactiveScore score, GateConfig gate) noexcept {
  return score.value() >= gate.threshold();
}

ArgExpr ArgExpr::literal(std::string text) { return ArgExpr(Literal{std::move(text)}); }

ArgExpr ArgExpr::result_ref(std::string tool_name, std::string field_name) {
  require_identifier(tool_name, "reference tool");
  require_identifier(field_name, "reference field");
  return ArgExpr(ResultRef{std::move(tool_name), std::move(field_name)});
}

ToolCall::ToolCall(std::string name, ArgList args)
    : name_(require_identifier(name, "tool name")), args_(std::move(args)) {
  std::set<std::string_view> seen;
  for (const auto& [param, _] : args_) {
    if (!seen.insert(param).second) {
      throw InvariantViolation("duplicate param '" + param + "' in call to " + name_);
    }
  }
}

const ArgExpr* ToolCall::find_arg(std::string_view param) const noexcept {
  for (const auto& [name, expr] : args_) {
    if (name == param) return &expr;
  }
  return nullptr;
}

bool ToolChain::references_well_ordered() const noexcept {
  std::set<std::string_view> called;
  for (const auto& call : calls_) {
    for (const auto& [_, expr] : call.args()) {
      if (expr.is_ref() && !called.contains(expr.as_ref().tool_name)) return false;
    }
    called.insert(call.name());
  }
  return true;
}

AgentOutput::AgentOutput(std::optional<std::string> thought, ProactiveScore score,
                         ToolChain chain, std::optional<std::string> response)
    : thought_(std::move(thought)),
      score_(score),
      chain_(std::move(chain)),
      response_(std::move(response)) {
  if (score_.value() <= 2 && (!chain_.empty() || response_)) {
    throw InvariantViolation("a score of " + std::to_string(score_.value()) +
                             " requires an empty chain and no response");
  }
}

AgentOutput AgentOutput::non_proactive(std::optional<std::string> thought) {
  return AgentOutput(std::move(thought), ProactiveScore(1), ToolChain{}, std::nullopt);
}

}  // namespace proagent
