#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "proagent/diagnostics.hpp"
#include "proagent/error.hpp"

namespace proagent {

struct ParamSpec {
  std::string name;
  std::string description;
  bool required = true;

  bool operator==(const ParamSpec&) const = default;
};

struct ToolDescriptor {
  std::string name;
  /// CamelCase heading used in the tool reference table.
  std::string display_name;
  std::string description;
  std::vector<ParamSpec> params;
  std::string output_description;
  /// Fields a result exposes to `$RESULT(tool.field)`; always includes "text".
  std::vector<std::string> output_fields;

  const ParamSpec* find_param(std::string_view param) const noexcept;
  bool has_output_field(std::string_view field) const noexcept;

  bool operator==(const ToolDescriptor&) const = default;
};

/// Resolved call arguments, in call order.
using TextArgs = std::vector<std::pair<std::string, std::string>>;

class ToolRegistry {
 public:
  ToolRegistry() = default;
  /// Throws ConfigError on duplicate names, non-identifier names, duplicate
  /// params, or a missing "text" output field.
  explicit ToolRegistry(std::vector<ToolDescriptor> tools);

  /// Throws UnknownTool.
  const ToolDescriptor& lookup(std::string_view name) const;
  const ToolDescriptor* find(std::string_view name) const noexcept;
  bool contains(std::string_view name) const noexcept { return find(name) != nullptr; }

  /// Descriptors in configuration order.
  const std::vector<ToolDescriptor>& tools() const noexcept { return tools_; }
  std::size_t size() const noexcept { return tools_.size(); }

  nlohmann::ordered_json to_json() const;
  static ToolRegistry from_json(const nlohmann::json& config);
  static ToolRegistry load(const std::filesystem::path& path);

  bool operator==(const ToolRegistry& other) const { return tools_ == other.tools_; }

 private:
  std::vector<ToolDescriptor> tools_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// The 20-tool benchmark registry.
const ToolRegistry& registry_default();

/// Reports MissingParam for each absent required param and UnknownParam for
/// each name the tool does not declare.
Diagnostics validate_args(const ToolDescriptor& descriptor,
                          const std::vector<std::string>& param_names);
Diagnostics validate_args(const ToolDescriptor& descriptor, const TextArgs& args);

struct ToolResult {
  std::map<std::string, std::string> fields;

  const std::string& text() const { return fields.at("text"); }
  bool operator==(const ToolResult&) const = default;
};

struct GeoLocation {
  std::string latitude;
  std::string longitude;
  std::string city;
};

struct AgendaEvent {
  std::string title;
  std::string time;
};

/// Lowercased, whitespace-trimmed text used for fixture table keys.
std::string normalize_key_text(std::string_view text);

/// Canonical key for a call: tool name plus args sorted by param name with
/// normalized values.
std::string call_key(std::string_view tool, const TextArgs& args);

/// Deterministic world state that backs the mock tools.
class WorldFixture {
 public:
  WorldFixture() = default;

  static WorldFixture from_json(const nlohmann::json& doc);
  static WorldFixture load(const std::filesystem::path& path);

  /// ISO-like "YYYY-MM-DDTHH:MM".
  const std::string& clock() const noexcept { return clock_; }
  const GeoLocation& location() const noexcept { return location_; }
  const std::vector<AgendaEvent>& agenda() const noexcept { return agenda_; }

  std::optional<std::string> weather(std::string_view city, std::string_view time) const;
  const std::map<std::string, std::string>* canned(std::string_view tool,
                                                   const TextArgs& args) const;
  bool fails(std::string_view tool, const TextArgs& args) const;

 private:
  std::string clock_ = "2025-01-15T09:00";
  GeoLocation location_{"0.0000", "0.0000", "Unknown"};
  std::map<std::string, std::string> weather_;
  std::vector<AgendaEvent> agenda_;
  std::map<std::string, std::map<std::string, std::string>> canned_;
  std::set<std::string> failing_calls_;
  std::set<std::string> failing_tools_;
};

/// Runs a mock tool. Throws UnknownTool, InvalidArguments when validate_args
/// reports anything, and SimulatedFailure for calls the fixture marks failing.
ToolResult invoke(const ToolRegistry& registry, const WorldFixture& fixture,
                  std::string_view name, const TextArgs& args);

}  // namespace proagent
