#include <algorithm>
#include <regex>

#include "proagent/chainlang.hpp"
#include "proagent/reasoner.hpp"

namespace proagent::reasoner {

using nlohmann::json;

std::string_view to_string(ParseStatus status) noexcept {
  switch (status) {
    case ParseStatus::Clean: return "Clean";
    case ParseStatus::Repaired: return "Repaired";
    case ParseStatus::Failed: return "Failed";
  }
  return "?";
}

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

std::string trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

bool blank(std::string_view text) { return text.find_first_not_of(" \t\r\n") == std::string_view::npos; }

const json* find_key(const json& record, std::initializer_list<const char*> keys, bool& alias) {
  bool first = true;
  for (const char* key : keys) {
    if (auto it = record.find(key); it != record.end()) {
      alias = !first;
      return &*it;
    }
    first = false;
  }
  return nullptr;
}

bool has_score(const json& value) {
  if (!value.is_object()) return false;
  bool alias = false;
  return find_key(value, {"proactive_score", "Proactive score", "score"}, alias) != nullptr;
}

// End (exclusive) of the balanced {...} starting at `open`, skipping braces
// inside string literals; npos when unbalanced.
std::size_t balanced_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return i + 1;
    }
  }
  return std::string_view::npos;
}

struct Located {
  json record;
  bool surrounded = false;
};

std::optional<Located> locate_record(std::string_view text) {
  auto whole = json::parse(text, nullptr, false);
  if (!whole.is_discarded() && has_score(whole)) return Located{std::move(whole), false};
  for (auto open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    auto end = balanced_end(text, open);
    if (end == std::string_view::npos) continue;
    auto candidate = json::parse(text.substr(open, end - open), nullptr, false);
    if (!candidate.is_discarded() && has_score(candidate)) return Located{std::move(candidate), true};
  }
  return std::nullopt;
}

std::string strip_fences(std::string_view text, bool& stripped) {
  static const std::regex fence(R"(```[A-Za-z0-9_-]*)");
  std::string input(text);
  std::string out = std::regex_replace(input, fence, "");
  stripped = out != input;
  return out;
}

// Integer score from a JSON value; nullopt for non-numeric values.
std::optional<long long> score_value(const json& value, std::vector<std::string>& notes) {
  if (value.is_number_unsigned()) return std::min<std::uint64_t>(value.get<std::uint64_t>(), 1000);
  if (value.is_number_integer()) return value.get<long long>();
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (!(d > -1000 && d < 1000) || d != static_cast<double>(static_cast<long long>(d))) {
      return std::nullopt;
    }
    notes.push_back("score given as a real number");
    return static_cast<long long>(d);
  }
  if (value.is_string()) {
    static const std::regex digits(R"(\s*(-?\d+)\s*)");
    std::smatch m;
    auto text = value.get<std::string>();
    if (!std::regex_match(text, m, digits)) return std::nullopt;
    notes.push_back("score given as text");
    auto number = m[1].str();
    return number.size() > 3 ? 0 : std::stoll(number);
  }
  return std::nullopt;
}

ParsedOutput failed(std::optional<std::string> thought, std::string reason) {
  ParsedOutput out;
  out.thought = std::move(thought);
  out.status = ParseStatus::Failed;
  out.notes = {std::move(reason)};
  return out;
}

ParsedOutput finish(std::optional<std::string> thought, long long raw_score, ToolChain chain,
                    std::optional<std::string> response, std::vector<std::string> notes) {
  if (raw_score < 1 || raw_score > 5) return failed(std::move(thought), "ScoreOutOfRange");
  ProactiveScore score(static_cast<int>(raw_score));
  if (score.value() <= 2) {
    if (!chain.empty()) {
      notes.push_back("tools dropped for a non-proactive score");
      chain = ToolChain{};
    }
    if (response) {
      notes.push_back("response dropped for a non-proactive score");
      response.reset();
    }
  }
  ParsedOutput out;
  out.thought = thought;
  out.status = notes.empty() ? ParseStatus::Clean : ParseStatus::Repaired;
  out.notes = std::move(notes);
  out.output = AgentOutput(std::move(thought), score, std::move(chain), std::move(response));
  return out;
}

}  // namespace

ParsedOutput parse_output(std::string_view completion) {
  std::vector<std::string> notes;
  std::optional<std::string> thought;
  std::string rest(completion);

  auto open = rest.find(kThinkOpen);
  auto close = rest.find(kThinkClose);
  if (open != std::string::npos && close != std::string::npos && close > open) {
    if (!blank(std::string_view(rest).substr(0, open))) notes.push_back("text before think block");
    thought = trim(std::string_view(rest).substr(open + kThinkOpen.size(), close - open - kThinkOpen.size()));
    rest = rest.substr(close + kThinkClose.size());
  } else if (close != std::string::npos) {
    notes.push_back("missing <think> tag");
    thought = trim(std::string_view(rest).substr(0, close));
    rest = rest.substr(close + kThinkClose.size());
  } else if (open != std::string::npos) {
    notes.push_back("unterminated think block");
    rest = rest.substr(open + kThinkOpen.size());
  }

  bool fenced = false;
  rest = strip_fences(rest, fenced);
  if (fenced) notes.push_back("code fence removed");

  if (auto located = locate_record(rest)) {
    if (located->surrounded) notes.push_back("prose around the record ignored");
    const auto& record = located->record;
    bool alias = false;
    const auto* score_json = find_key(record, {"proactive_score", "Proactive score", "score"}, alias);
    if (alias) notes.push_back("score key alias");
    auto raw_score = score_value(*score_json, notes);
    if (!raw_score) return failed(std::move(thought), "InvalidScore");

    ToolChain chain;
    const auto* tools = find_key(record, {"tools", "Tools"}, alias);
    if (alias) notes.push_back("tools key alias");
    if (tools && !tools->is_null()) {
      try {
        if (tools->is_string()) {
          chain = chainlang::parse_chain(tools->get<std::string>());
        } else {
          chain = chainlang::parse_chain_json(nlohmann::ordered_json(*tools));
        }
      } catch (const Error& e) {
        notes.push_back(std::string("undecodable tools dropped: ") + e.what());
      }
    }

    std::optional<std::string> response;
    const auto* response_json = find_key(record, {"response", "Response"}, alias);
    if (response_json && response_json->is_string()) {
      auto text = response_json->get<std::string>();
      if (trim(text) != chainlang::kNoneText && !blank(text)) response = std::move(text);
    }
    return finish(std::move(thought), *raw_score, std::move(chain), std::move(response), std::move(notes));
  }

  static const std::regex pattern(R"(proactive[ _-]?score["']?\s*(?:is|[:=])?\s*(?:set to\s*)?(-?\d+))",
                                  std::regex::icase);
  std::smatch m;
  if (std::regex_search(rest, m, pattern) ||
      (thought && std::regex_search(*thought, m, pattern))) {
    notes.push_back("score recovered from text");
    auto digits = m[1].str();
    long long raw_score = digits.size() > 3 ? 0 : std::stoll(digits);
    return finish(std::move(thought), raw_score, ToolChain{}, std::nullopt, std::move(notes));
  }
  return failed(std::move(thought), "NoScore");
}

}  // namespace proagent::reasoner
