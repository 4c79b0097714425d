#include <sstream>

#include "proagent/chainlang.hpp"
#include "proagent/reasoner.hpp"

namespace proagent::reasoner {

namespace {

constexpr std::string_view kInstructions =
    R"(You are a context-aware proactive assistant running on the user's wearable devices.
You receive what the user currently sees and hears, notifications from the user's phone,
and persona statements describing who the user is. The user has not asked for anything.
Decide whether offering help right now is warranted and, if it is, plan the tools that
would gather what is needed to help.

Rate the need for proactive help with an integer proactive score from 1 to 5:
1 - no proactive help is needed.
2 - help could be of slight use, but not enough to interrupt the user.
3 - help would be useful; offer it briefly.
4 - help is clearly useful and timely.
5 - help is strongly needed right now.
Scores 1 and 2 mean no action: the tool chain and the response must both be "None".

Key considerations:
- Stay conservative. An unnecessary interruption is worse than staying silent.
- Use the personas to judge whether this user would welcome help.
- Only use tools from the tool set below, with their exact names and params.
- Tools run in the listed order. To pass a field of an earlier tool's result into a
  later call, write the whole argument as $RESULT(tool_name.field).
)";

constexpr std::string_view kOutputFormat =
    R"(## Output format
First write your reasoning between <think> and </think>. Then write exactly one JSON object:
{"proactive_score": <1-5>, "tools": [{"name": "<tool>", "params": {"<param>": "<value>"}}] or "None", "response": "<message to the user>" or "None"}
Use "params": "None" for a call without arguments.
)";

}  // namespace

std::string render_tool_block(const ToolDescriptor& tool) {
  std::ostringstream out;
  out << "### " << tool.name << "\n" << tool.description << "\n";
  if (tool.params.empty()) {
    out << "Params: None\n";
  } else {
    out << "Params:\n";
    for (const auto& param : tool.params) {
      out << "- " << param.name << (param.required ? " (required)" : " (optional)") << ": "
          << param.description << "\n";
    }
  }
  out << "Output: " << tool.output_description << "\nOutput fields:";
  for (std::size_t i = 0; i < tool.output_fields.size(); ++i) {
    out << (i ? ", " : " ") << tool.output_fields[i];
  }
  out << "\n";
  return out.str();
}

std::string build_static_prompt(const ToolRegistry& registry) {
  std::string out(kInstructions);
  out += "\n## Tool set\n";
  for (const auto& tool : registry.tools()) out += "\n" + render_tool_block(tool);
  out += "\n";
  out += kOutputFormat;
  return out;
}

std::string build_runtime_prompt(const ContextBundle& context, const PersonaSet& personas) {
  std::string out = "## Personas\n";
  if (personas.empty()) {
    out += std::string(kNoPersonaMarker) + "\n";
  } else {
    for (const auto& persona : personas.entries()) out += "- " + persona + "\n";
  }
  out += "\n## Context information\n" + context.combined() + "\n";
  return out;
}

std::string PromptBundle::rendered() const { return static_part + "\n" + runtime_part; }

PromptBundle build_prompt(const ToolRegistry& registry, const BenchmarkSample& sample) {
  return {build_static_prompt(registry), build_runtime_prompt(sample.context, sample.personas)};
}

std::string format_completion(const AgentOutput& output, const ToolRegistry& registry) {
  nlohmann::ordered_json record{
      {"proactive_score", output.score().value()},
      {"tools", chainlang::chain_to_json(output.chain(), registry, chainlang::UnknownTools::OmitDesc)},
      {"response", output.response().value_or(std::string(chainlang::kNoneText))}};
  std::string out;
  if (output.thought()) out += "<think>" + *output.thought() + "</think>\n";
  return out + record.dump();
}

}  // namespace proagent::reasoner
