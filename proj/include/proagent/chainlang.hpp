#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "proagent/core.hpp"
#include "proagent/diagnostics.hpp"
#include "proagent/toolset.hpp"

// Wire format of the dataset "Tools" field:
//
//   None
//   [{"name": "get_current_gps_coordinates", "desc": "...", "params": "None"},
//    {"name": "get_city_weather", "desc": "...",
//     "params": {"city": "$RESULT(get_current_gps_coordinates.city)", "time": "now"}}]
//
// An argument is a ResultRef only when the whole value is `$RESULT(tool.field)`.
namespace proagent::chainlang {

inline constexpr std::string_view kReferenceOpen = "$RESULT(";
inline constexpr std::string_view kNoneText = "None";

/// Literal for anything not starting with `$RESULT(`; throws
/// MalformedReference for a `$RESULT(` value outside the grammar.
ArgExpr parse_arg(std::string_view value);

/// Inverse of parse_arg.
std::string render_arg(const ArgExpr& expr);

/// Parses the "Tools" text. Throws DecodeError or MalformedReference (with the
/// offending call index).
ToolChain parse_chain(std::string_view raw);

/// Same as parse_chain for an already-decoded value: an array of records or
/// the string "None"/null.
ToolChain parse_chain_json(const nlohmann::ordered_json& value);

/// Reject throws UnknownTool; OmitDesc writes unknown tools without "desc"
/// (model predictions may name tools outside the registry).
enum class UnknownTools { Reject, OmitDesc };

/// Canonical text: "None" for an empty chain, else the record array with
/// descriptions taken from the registry.
std::string serialize_chain(const ToolChain& chain, const ToolRegistry& registry,
                            UnknownTools policy = UnknownTools::Reject);

/// Canonical record array (or the string "None") as a JSON value.
nlohmann::ordered_json chain_to_json(const ToolChain& chain, const ToolRegistry& registry,
                                     UnknownTools policy = UnknownTools::Reject);

/// Empty iff every tool exists, every call's args pass validate_args and every
/// reference targets a strictly earlier call and a declared output field.
Diagnostics validate_chain(const ToolChain& chain, const ToolRegistry& registry);

}  // namespace proagent::chainlang
