#pragma once

// Independent classifier for argument text, used to check parse_arg over an
// exhaustive enumeration of short inputs.

#include <functional>
#include <regex>
#include <string>

#include "proagent/chainlang.hpp"

namespace proagent::testing {

enum class ArgClass { Literal, Reference, Malformed };

inline std::string describe(ArgClass c) {
  switch (c) {
    case ArgClass::Literal: return "Literal";
    case ArgClass::Reference: return "Reference";
    case ArgClass::Malformed: return "Malformed";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, ArgClass c) { return os << describe(c); }

inline ArgClass classify_with_regex(const std::string& input) {
  static const std::regex reference(
      R"(^\$RESULT\([A-Za-z_][A-Za-z0-9_]*\.[A-Za-z_][A-Za-z0-9_]*\)$)");
  if (std::regex_match(input, reference)) return ArgClass::Reference;
  if (input.rfind("$RESULT(", 0) == 0) return ArgClass::Malformed;
  return ArgClass::Literal;
}

inline ArgClass classify_with_parser(const std::string& input) {
  try {
    return chainlang::parse_arg(input).is_ref() ? ArgClass::Reference : ArgClass::Literal;
  } catch (const MalformedReference&) {
    return ArgClass::Malformed;
  }
}

/// Every prefix in a small set followed by every string of length <= 5 over
/// a small alphabet that covers identifier chars and the grammar punctuation.
inline void enumerate_parse_arg_inputs(const std::function<void(const std::string&)>& visit) {
  static const std::string prefixes[] = {"", "$RESULT(", "$RESULT", "$result(", " $RESULT("};
  static const std::string alphabet = "a1_.() $";
  for (const auto& prefix : prefixes) {
    std::string suffix;
    std::function<void(int)> grow = [&](int remaining) {
      visit(prefix + suffix);
      if (remaining == 0) return;
      for (char c : alphabet) {
        suffix.push_back(c);
        grow(remaining - 1);
        suffix.pop_back();
      }
    };
    grow(5);
  }
}

}  // namespace proagent::testing
