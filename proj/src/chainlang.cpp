#include "proagent/chainlang.hpp"

#include <algorithm>
#include <cctype>

namespace proagent::chainlang {

using nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_none_marker(const ordered_json& value) {
  return value.is_null() || (value.is_string() && iequals(trim(value.get_ref<const std::string&>()),
                                                          kNoneText));
}

std::string at_call(std::size_t index, const std::string& message) {
  return "call " + std::to_string(index) + ": " + message;
}

}  // namespace

ArgExpr parse_arg(std::string_view value) {
  if (!value.starts_with(kReferenceOpen)) return ArgExpr::literal(std::string(value));

  auto malformed = [&](const std::string& why) {
    return MalformedReference("'" + std::string(value) + "': " + why);
  };
  if (!value.ends_with(")")) throw malformed("missing closing parenthesis");
  auto body = value.substr(kReferenceOpen.size(),
                           value.size() - kReferenceOpen.size() - 1);
  auto dot = body.find('.');
  if (dot == std::string_view::npos) throw malformed("expected tool.field");
  auto tool = body.substr(0, dot);
  auto field = body.substr(dot + 1);
  if (!is_identifier(tool)) throw malformed("bad tool identifier '" + std::string(tool) + "'");
  if (!is_identifier(field)) {
    throw malformed("bad field identifier '" + std::string(field) + "'");
  }
  return ArgExpr::result_ref(std::string(tool), std::string(field));
}

std::string render_arg(const ArgExpr& expr) {
  if (expr.is_literal()) return expr.as_literal().text;
  const auto& ref = expr.as_ref();
  return std::string(kReferenceOpen) + ref.tool_name + "." + ref.field_name + ")";
}

ToolChain parse_chain_json(const ordered_json& value) {
  if (is_none_marker(value)) return {};
  if (!value.is_array()) throw DecodeError("tool chain must be an array of records or \"None\"");

  std::vector<ToolCall> calls;
  calls.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    const auto& record = value[i];
    if (!record.is_object()) throw DecodeError(at_call(i, "record is not an object"));
    auto name_it = record.find("name");
    if (name_it == record.end() || !name_it->is_string()) {
      throw DecodeError(at_call(i, "record lacks a string \"name\""));
    }
    const auto& name = name_it->get_ref<const std::string&>();
    if (!is_identifier(name)) {
      throw DecodeError(at_call(i, "tool name '" + name + "' is not an identifier"));
    }

    ArgList args;
    auto params_it = record.find("params");
    if (params_it != record.end() && !is_none_marker(*params_it)) {
      if (!params_it->is_object()) {
        throw DecodeError(at_call(i, "\"params\" must be an object or \"None\""));
      }
      for (const auto& [param, arg] : params_it->items()) {
        if (!is_identifier(param)) {
          throw DecodeError(at_call(i, "param name '" + param + "' is not an identifier"));
        }
        std::string text;
        if (arg.is_string()) {
          text = arg.get<std::string>();
        } else if (arg.is_number() || arg.is_boolean()) {
          text = arg.dump();
        } else {
          throw DecodeError(at_call(i, "param '" + param + "' must be a scalar"));
        }
        try {
          args.emplace_back(param, parse_arg(text));
        } catch (const MalformedReference& e) {
          throw MalformedReference(at_call(i, e.what()), static_cast<int>(i));
        }
      }
    }
    calls.emplace_back(name, std::move(args));
  }
  return ToolChain(std::move(calls));
}

ToolChain parse_chain(std::string_view raw) {
  auto text = trim(raw);
  if (iequals(text, kNoneText)) return {};
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw DecodeError(std::string("tool chain is not valid JSON: ") + e.what());
  }
  if (doc.is_string() || doc.is_null()) {
    if (is_none_marker(doc)) return {};
    throw DecodeError("tool chain must be an array of records or \"None\"");
  }
  return parse_chain_json(doc);
}

namespace {

// Description for a call, or nullptr for an unknown tool under OmitDesc.
const std::string* description_of(const ToolCall& call, const ToolRegistry& registry,
                                  UnknownTools policy) {
  if (policy == UnknownTools::OmitDesc) {
    const auto* descriptor = registry.find(call.name());
    return descriptor ? &descriptor->description : nullptr;
  }
  return &registry.lookup(call.name()).description;
}

}  // namespace

ordered_json chain_to_json(const ToolChain& chain, const ToolRegistry& registry,
                           UnknownTools policy) {
  if (chain.empty()) return std::string(kNoneText);
  ordered_json records = ordered_json::array();
  for (const auto& call : chain.calls()) {
    const auto* desc = description_of(call, registry, policy);
    ordered_json params;
    if (call.args().empty()) {
      params = std::string(kNoneText);
    } else {
      params = ordered_json::object();
      for (const auto& [name, expr] : call.args()) params[name] = render_arg(expr);
    }
    ordered_json record{{"name", call.name()}};
    if (desc) record["desc"] = *desc;
    record["params"] = std::move(params);
    records.push_back(std::move(record));
  }
  return records;
}

std::string serialize_chain(const ToolChain& chain, const ToolRegistry& registry,
                            UnknownTools policy) {
  if (chain.empty()) return std::string(kNoneText);
  // Same layout as the shipped examples: ", " and ": " separators, one line.
  auto quote = [](const std::string& text) { return ordered_json(text).dump(); };
  std::string out = "[";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& call = chain.calls()[i];
    const auto* desc = description_of(call, registry, policy);
    if (i) out += ", ";
    out += "{\"name\": " + quote(call.name());
    if (desc) out += ", \"desc\": " + quote(*desc);
    out += ", \"params\": ";
    if (call.args().empty()) {
      out += quote(std::string(kNoneText));
    } else {
      out += '{';
      for (std::size_t j = 0; j < call.args().size(); ++j) {
        const auto& [name, expr] = call.args()[j];
        if (j) out += ", ";
        out += quote(name) + ": " + quote(render_arg(expr));
      }
      out += '}';
    }
    out += '}';
  }
  out += ']';
  return out;
}

Diagnostics validate_chain(const ToolChain& chain, const ToolRegistry& registry) {
  Diagnostics out;
  const auto& calls = chain.calls();
  for (std::size_t k = 0; k < calls.size(); ++k) {
    const auto& call = calls[k];
    const auto* descriptor = registry.find(call.name());
    if (!descriptor) {
      out.push_back({DiagnosticKind::UnknownTool, k, call.name(),
                     "no tool named '" + call.name() + "'"});
    } else {
      std::vector<std::string> names;
      for (const auto& [name, _] : call.args()) names.push_back(name);
      for (auto diagnostic : validate_args(*descriptor, names)) {
        diagnostic.call_index = k;
        out.push_back(std::move(diagnostic));
      }
    }

    for (const auto& [param, expr] : call.args()) {
      if (expr.is_literal()) {
        if (expr.as_literal().text.find(kReferenceOpen) != std::string::npos) {
          out.push_back({DiagnosticKind::MalformedReference, k, param,
                         "references must be the entire argument value"});
        }
        continue;
      }
      const auto& ref = expr.as_ref();
      auto is_target = [&](const ToolCall& c) { return c.name() == ref.tool_name; };
      bool earlier = std::any_of(calls.begin(), calls.begin() + static_cast<long>(k), is_target);
      if (!earlier) {
        bool later = std::any_of(calls.begin() + static_cast<long>(k), calls.end(), is_target);
        out.push_back({later ? DiagnosticKind::ForwardReference : DiagnosticKind::UnboundReference,
                       k, param,
                       render_arg(expr) + (later ? " refers to a call that has not run yet"
                                                 : " refers to a tool absent from the chain")});
        continue;
      }
      const auto* target = registry.find(ref.tool_name);
      if (target && !target->has_output_field(ref.field_name)) {
        out.push_back({DiagnosticKind::UnknownField, k, param,
                       ref.tool_name + " does not expose '" + ref.field_name + "'"});
      }
    }
  }
  return out;
}

}  // namespace proagent::chainlang
