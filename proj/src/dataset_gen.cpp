#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <random>
#include <set>

#include "proagent/chainlang.hpp"
#include "proagent/dataset.hpp"

namespace proagent::dataset {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::DecodeError: return "DecodeError";
    case RejectReason::Invalid: return "Invalid";
    case RejectReason::Duplicate: return "Duplicate";
    case RejectReason::StrategyMismatch: return "StrategyMismatch";
  }
  return "?";
}

std::string_view to_string(GenerationStatus status) noexcept {
  switch (status) {
    case GenerationStatus::Complete: return "Complete";
    case GenerationStatus::AttemptBudgetExhausted: return "AttemptBudgetExhausted";
    case GenerationStatus::BackendUnavailable: return "BackendUnavailable";
  }
  return "?";
}

void GenerationJob::check() const {
  if (const auto* s = std::get_if<ScoreAware>(&strategy); s && (s->score < 1 || s->score > 5)) {
    throw ConfigError("score-aware generation needs a score in 1-5");
  }
  if (const auto* s = std::get_if<ScenarioAware>(&strategy)) {
    if (s->label.empty()) throw ConfigError("scenario-aware generation needs a scenario label");
    if (scenarios && std::find(scenarios->begin(), scenarios->end(), s->label) == scenarios->end()) {
      throw UnknownScenario("scenario '" + s->label + "' is not declared");
    }
  }
  if (exemplars.empty()) throw ConfigError("generation needs at least one exemplar");
  if (count == 0) throw ConfigError("count must be positive");
  if (parallelism == 0) throw ConfigError("parallelism must be positive");
}

std::string context_digest(std::string_view context) {
  std::string normalized;
  bool pending_space = false;
  for (unsigned char c : context) {
    if (std::isspace(c)) {
      pending_space = !normalized.empty();
      continue;
    }
    if (pending_space) normalized += ' ';
    pending_space = false;
    normalized += static_cast<char>(std::tolower(c));
  }
  return reasoner::prompt_digest(normalized);
}

namespace {

constexpr std::size_t kCandidatesPerCall = 5;

std::vector<std::size_t> pick(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  order.resize(std::min(k, n));
  return order;
}

std::vector<const BenchmarkSample*> matching_exemplars(const GenerationJob& job) {
  std::vector<const BenchmarkSample*> out;
  for (const auto& sample : job.exemplars) {
    bool match = std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ScenarioAware>) {
            return sample.scenario == s.label;
          } else {
            return sample.annotation.score().value() == s.score;
          }
        },
        job.strategy);
    if (match) out.push_back(&sample);
  }
  if (out.empty()) {
    for (const auto& sample : job.exemplars) out.push_back(&sample);
  }
  return out;
}

std::string target_text(const GenerationJob& job) {
  if (const auto* s = std::get_if<ScenarioAware>(&job.strategy)) {
    return "Every sample must take place in the \"" + s->label +
           "\" scenario and set \"Scenario\" to \"" + s->label +
           "\". Vary the proactive scores across samples.";
  }
  int score = std::get<ScoreAware>(job.strategy).score;
  std::string out = "Every sample must have \"Proactive score\": " + std::to_string(score) + ".";
  if (score <= 2) out += " Its \"Tools\" and \"Response\" must both be \"None\".";
  return out + " Vary the scenarios across samples.";
}

}  // namespace

std::string build_generation_prompt(const GenerationJob& job, const ToolRegistry& registry,
                                    std::size_t call) {
  std::seed_seq seq{static_cast<std::uint32_t>(job.seed), static_cast<std::uint32_t>(job.seed >> 32),
                    static_cast<std::uint32_t>(call)};
  std::mt19937_64 rng(seq);

  std::string out =
      "You are helping build a benchmark for proactive assistants on wearable devices. Write new, "
      "realistic and diverse data samples. Each sample describes what a user currently sees and "
      "hears, phone notifications, and the user's personas, then annotates whether an assistant "
      "should offer help without being asked and which tools it would use.\n";
  out += "\n## Target\n" + target_text(job) + "\n";
  out +=
      "\n## Data format\nOne JSON object per line with exactly these fields:\n"
      "- \"Context information\": the sensory context, e.g. \"Visual information shows ... Audio "
      "information shows ...\".\n"
      "- \"Personas\": a list of persona statements about the user.\n"
      "- \"Thoughts\": the annotator's reasoning about the context, the score and the tools.\n"
      "- \"Proactive score\": an integer from 1 (no help needed) to 5 (help strongly needed).\n"
      "- \"Tools\": a string holding a JSON list of {\"name\", \"desc\", \"params\"} tool calls, or "
      "\"None\".\n"
      "- \"Response\": the message the assistant gives the user, or \"None\".\n"
      "- \"Scenario\": the scenario label";
  if (job.scenarios) {
    out += ", one of:";
    for (const auto& label : *job.scenarios) out += " " + label;
  }
  out +=
      ".\nWhen the score is 1 or 2, \"Tools\" and \"Response\" must both be \"None\". Otherwise "
      "plan at least one tool call and write a response. Use \"params\": \"None\" for calls "
      "without arguments. To pass a field of an earlier tool's result into a later call, write "
      "the whole argument as $RESULT(tool_name.field).\n";

  out += "\n## Example samples\n";
  auto pool = matching_exemplars(job);
  for (auto i : pick(pool.size(), job.exemplars_per_prompt, rng)) {
    auto record = encode_record(*pool[i]);
    record.erase(std::string(kIdField));
    out += record.dump() + "\n";
  }

  if (!job.persona_pool.empty()) {
    out += "\n## Personas to draw from\n";
    for (auto i : pick(job.persona_pool.size(), job.personas_per_prompt, rng)) {
      out += "- " + job.persona_pool[i] + "\n";
    }
  }

  out += "\n## Tool set\n";
  for (const auto& tool : registry.tools()) out += "\n" + reasoner::render_tool_block(tool);

  auto n = std::min(job.count, kCandidatesPerCall);
  out += "\nWrite " + std::to_string(n) + " new sample" + (n == 1 ? "" : "s") +
         ", one JSON object per line, and nothing else.\n";
  return out;
}

std::vector<std::variant<json, std::string>> split_candidates(std::string_view reply) {
  std::vector<std::string> lines;
  {
    std::string current;
    for (char c : reply) {
      if (c == '\n') {
        lines.push_back(std::move(current));
        current.clear();
      } else {
        current += c;
      }
    }
    lines.push_back(std::move(current));
  }
  std::string body;
  for (const auto& line : lines) {
    auto begin = line.find_first_not_of(" \t\r");
    if (begin != std::string::npos && line.compare(begin, 3, "```") == 0) continue;
    body += line + "\n";
  }

  std::vector<std::variant<json, std::string>> out;
  auto whole = json::parse(body, nullptr, false);
  if (!whole.is_discarded() && whole.is_array()) {
    for (auto& item : whole) out.emplace_back(std::move(item));
    return out;
  }
  if (!whole.is_discarded()) {
    out.emplace_back(std::move(whole));
    return out;
  }
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string::npos) end = body.size();
    auto line = body.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto value = json::parse(line, nullptr, false);
    if (value.is_discarded()) {
      out.emplace_back(std::move(line));
    } else {
      out.emplace_back(std::move(value));
    }
  }
  return out;
}

namespace {

struct CallOutcome {
  std::optional<std::string> reply;
  std::string error_code;
  std::string error_message;
};

CallOutcome call_backend(reasoner::Backend& backend, std::string prompt, std::size_t call) {
  try {
    return {backend.generate({std::move(prompt), "gen-" + std::to_string(call)}), {}, {}};
  } catch (const Error& e) {
    return {std::nullopt, e.code(), e.what()};
  }
}

std::string diagnostics_text(const Diagnostics& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    if (!out.empty()) out += "; ";
    out += format(d);
  }
  return out;
}

}  // namespace

GenerationResult generate(const GenerationJob& job, reasoner::Backend& backend,
                          const ToolRegistry& registry) {
  job.check();
  GenerationResult result;
  const std::size_t budget = job.attempt_budget ? job.attempt_budget : 5 * job.count;
  std::set<std::string> seen;
  for (const auto& sample : job.exemplars) seen.insert(context_digest(sample.context.combined()));

  auto reject = [&](std::size_t call, std::size_t pos, RejectReason reason, std::string detail,
                    std::string raw) {
    result.rejected.push_back({call, pos, reason, std::move(detail), std::move(raw)});
  };

  auto consider = [&](std::size_t call, std::size_t pos, const std::variant<json, std::string>& candidate) {
    ++result.candidates_seen;
    if (const auto* raw = std::get_if<std::string>(&candidate)) {
      reject(call, pos, RejectReason::DecodeError, "not a JSON record", *raw);
      return;
    }
    const auto& record = std::get<json>(candidate);
    auto raw = record.dump();
    auto checked = check_record(record, 0, job.scenarios);
    if (!checked.sample) {
      reject(call, pos, RejectReason::DecodeError, diagnostics_text(checked.diagnostics), raw);
      return;
    }
    auto sample = std::move(*checked.sample);
    if (const auto* s = std::get_if<ScoreAware>(&job.strategy)) {
      if (sample.annotation.score().value() != s->score) {
        reject(call, pos, RejectReason::StrategyMismatch,
               "score " + std::to_string(sample.annotation.score().value()) + " instead of " +
                   std::to_string(s->score),
               raw);
        return;
      }
    } else {
      const auto& label = std::get<ScenarioAware>(job.strategy).label;
      if (!sample.scenario) sample.scenario = label;
      if (*sample.scenario != label) {
        reject(call, pos, RejectReason::StrategyMismatch, "scenario '" + *sample.scenario + "'", raw);
        return;
      }
    }
    auto diagnostics = chainlang::validate_chain(sample.annotation.chain(), registry);
    if (!diagnostics.empty()) {
      reject(call, pos, RejectReason::Invalid, diagnostics_text(diagnostics), raw);
      return;
    }
    if (!seen.insert(context_digest(sample.context.combined())).second) {
      reject(call, pos, RejectReason::Duplicate, "context already present", raw);
      return;
    }
    sample.id = job.id_prefix + "-" + std::to_string(result.accepted.size() + 1);
    sample.tools_text = chainlang::serialize_chain(sample.annotation.chain(), registry);
    result.accepted.push_back(std::move(sample));
  };

  auto done = [&] { return result.accepted.size() >= job.count || result.candidates_seen >= budget; };
  std::size_t next_call = 1;
  bool stopped = false;
  while (!done() && !stopped) {
    std::vector<std::future<CallOutcome>> batch;
    for (std::size_t k = 0; k < job.parallelism; ++k) {
      auto call = next_call + k;
      auto prompt = build_generation_prompt(job, registry, call);
      if (job.parallelism == 1) {
        std::promise<CallOutcome> ready;
        ready.set_value(call_backend(backend, std::move(prompt), call));
        batch.push_back(ready.get_future());
      } else {
        batch.push_back(std::async(std::launch::async, call_backend, std::ref(backend), std::move(prompt), call));
      }
    }
    // Results merge in call order regardless of completion order.
    for (std::size_t k = 0; k < batch.size(); ++k) {
      auto outcome = batch[k].get();
      if (stopped || done()) continue;
      auto call = next_call + k;
      if (!outcome.reply) {
        stopped = true;
        result.stop_reason = outcome.error_code + ": " + outcome.error_message;
        if (outcome.error_code != "TranscriptMiss") result.status = GenerationStatus::BackendUnavailable;
        continue;
      }
      ++result.calls;
      auto candidates = split_candidates(*outcome.reply);
      if (candidates.empty()) {
        ++result.candidates_seen;
        reject(call, 0, RejectReason::DecodeError, "reply holds no candidates", *outcome.reply);
        continue;
      }
      for (std::size_t pos = 0; pos < candidates.size() && !done(); ++pos) {
        consider(call, pos, candidates[pos]);
      }
    }
    next_call += job.parallelism;
  }

  if (result.accepted.size() >= job.count) {
    result.status = GenerationStatus::Complete;
  } else if (result.status != GenerationStatus::BackendUnavailable) {
    result.status = GenerationStatus::AttemptBudgetExhausted;
    if (result.stop_reason.empty()) {
      result.stop_reason = "examined " + std::to_string(result.candidates_seen) + " of " +
                           std::to_string(budget) + " candidates";
    }
  }
  return result;
}

std::vector<std::string> load_persona_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(in, line)) {
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    pool.push_back(line.substr(begin, end - begin + 1));
  }
  return pool;
}

}  // namespace proagent::dataset
