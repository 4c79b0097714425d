#include "proagent/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "proagent/chainlang.hpp"

namespace proagent::dataset {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string_view>& known_fields() {
  static const std::set<std::string_view> fields = {
      kContextField, kPersonasField, kThoughtsField, kScoreField, kToolsField,
      kResponseField, kScenarioField, kMediaField, kIdField};
  return fields;
}

bool blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

bool is_none(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return false;
  auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1) == chainlang::kNoneText;
}

std::string default_id(std::size_t index) { return "sample-" + std::to_string(index + 1); }

bool is_header(const json& record) {
  return record.is_object() && record.size() == 1 && record.contains("header");
}

std::optional<std::vector<std::string>> header_scenarios(const json& record,
                                                         const std::string& where) {
  try {
    const auto& header = record.at("header");
    if (!header.contains("scenarios")) return std::nullopt;
    return header.at("scenarios").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DecodeError(where + ": malformed header: " + e.what());
  }
}

}  // namespace

RecordCheck check_record(const json& record, std::size_t index,
                         const std::optional<std::vector<std::string>>& scenarios) {
  RecordCheck out;
  out.id = default_id(index);
  auto add = [&](DiagnosticKind kind, std::string subject, std::string message,
                 std::optional<std::size_t> call = std::nullopt) {
    out.diagnostics.push_back({kind, call, std::move(subject), std::move(message)});
  };
  if (!record.is_object()) {
    add(DiagnosticKind::InvalidFieldType, "", "record is not an object");
    return out;
  }

  for (const auto& [key, value] : record.items()) {
    if (!known_fields().contains(key)) add(DiagnosticKind::UnknownRecordField, key, "unknown field");
  }
  if (auto it = record.find(kIdField); it != record.end()) {
    if (it->is_string() && !blank(it->get<std::string>())) {
      out.id = it->get<std::string>();
    } else {
      add(DiagnosticKind::InvalidFieldType, std::string(kIdField), "must be a non-blank string");
    }
  }

  auto field = [&](std::string_view name) -> const json* {
    auto it = record.find(name);
    if (it == record.end()) {
      add(DiagnosticKind::MissingRecordField, std::string(name), "required field is missing");
      return nullptr;
    }
    return &*it;
  };
  auto text_field = [&](std::string_view name) -> std::optional<std::string> {
    const auto* value = field(name);
    if (!value) return std::nullopt;
    if (!value->is_string()) {
      add(DiagnosticKind::InvalidFieldType, std::string(name), "must be a string");
      return std::nullopt;
    }
    return value->get<std::string>();
  };

  auto context = text_field(kContextField);
  if (context && blank(*context)) {
    add(DiagnosticKind::EmptyContext, std::string(kContextField), "context is blank");
  }

  std::vector<std::string> personas;
  bool personas_ok = false;
  if (const auto* value = field(kPersonasField)) {
    if (!value->is_array()) {
      add(DiagnosticKind::InvalidFieldType, std::string(kPersonasField), "must be a list of strings");
    } else {
      personas_ok = true;
      for (std::size_t i = 0; i < value->size(); ++i) {
        const auto& entry = (*value)[i];
        if (!entry.is_string()) {
          add(DiagnosticKind::InvalidFieldType, std::string(kPersonasField),
              "entry " + std::to_string(i) + " is not a string");
          personas_ok = false;
        } else if (blank(entry.get<std::string>())) {
          add(DiagnosticKind::BlankPersona, std::string(kPersonasField),
              "entry " + std::to_string(i) + " is blank");
          personas_ok = false;
        } else {
          personas.push_back(entry.get<std::string>());
        }
      }
    }
  }

  auto thoughts = text_field(kThoughtsField);

  std::optional<int> score;
  if (const auto* value = field(kScoreField)) {
    if (!value->is_number_integer()) {
      add(DiagnosticKind::InvalidFieldType, std::string(kScoreField), "must be an integer");
    } else if (auto raw = value->get<long long>(); raw < 1 || raw > 5) {
      add(DiagnosticKind::ScoreOutOfRange, std::string(kScoreField),
          "score " + std::to_string(raw) + " is outside 1-5");
    } else {
      score = static_cast<int>(raw);
    }
  }

  auto tools_text = text_field(kToolsField);
  if (tools_text) {
    try {
      out.chain = chainlang::parse_chain(*tools_text);
    } catch (const MalformedReference& e) {
      std::optional<std::size_t> call;
      if (e.call_index() >= 0) call = static_cast<std::size_t>(e.call_index());
      add(DiagnosticKind::MalformedReference, std::string(kToolsField), e.what(), call);
    } catch (const DecodeError& e) {
      add(DiagnosticKind::DecodeError, std::string(kToolsField), e.what());
    }
  }

  auto response = text_field(kResponseField);

  std::optional<std::string> scenario;
  if (auto it = record.find(kScenarioField); it != record.end()) {
    if (!it->is_string()) {
      add(DiagnosticKind::InvalidFieldType, std::string(kScenarioField), "must be a string");
    } else {
      scenario = it->get<std::string>();
      if (scenarios && std::find(scenarios->begin(), scenarios->end(), *scenario) == scenarios->end()) {
        add(DiagnosticKind::UnknownScenario, *scenario, "scenario is not declared in the header");
      }
    }
  }

  std::vector<std::string> media;
  if (auto it = record.find(kMediaField); it != record.end()) {
    if (!it->is_array() || !std::all_of(it->begin(), it->end(), [](const json& m) { return m.is_string(); })) {
      add(DiagnosticKind::InvalidFieldType, std::string(kMediaField), "must be a list of paths");
    } else {
      media = it->get<std::vector<std::string>>();
    }
  }

  if (score && out.chain && response) {
    bool proactive = *score > 2;
    bool has_tools = !out.chain->empty();
    bool has_response = !is_none(*response);
    if (proactive != has_tools || proactive != has_response) {
      add(DiagnosticKind::ScoreChainMismatch, std::string(kScoreField),
          proactive ? "score " + std::to_string(*score) + " needs a tool chain and a response"
                    : "score " + std::to_string(*score) + " requires Tools and Response to be None");
    }
  }

  if (!out.diagnostics.empty() || !context || !personas_ok || !thoughts || !score || !out.chain ||
      !response || !tools_text) {
    return out;
  }
  BenchmarkSample sample;
  sample.id = out.id;
  sample.context = ContextBundle::from_combined(*context);
  sample.personas = PersonaSet(std::move(personas));
  ProactiveScore ps(*score);
  std::optional<std::string> final_response;
  if (!is_none(*response)) final_response = *response;
  sample.annotation = AgentOutput(*thoughts, ps, *out.chain, final_response);
  sample.scenario = scenario;
  sample.media = std::move(media);
  sample.tools_text = *tools_text;
  out.sample = std::move(sample);
  return out;
}

BenchmarkSample decode_record(const json& record, std::size_t index,
                              const std::optional<std::vector<std::string>>& scenarios) {
  auto checked = check_record(record, index, scenarios);
  if (!checked.diagnostics.empty()) {
    throw DecodeError("record " + std::to_string(index) + " (" + checked.id +
                      "): " + format(checked.diagnostics.front()));
  }
  return std::move(*checked.sample);
}

ordered_json encode_record(const BenchmarkSample& sample) {
  const auto& annotation = sample.annotation;
  std::string tools = sample.tools_text;
  if (tools.empty() && annotation.chain().empty()) tools = std::string(chainlang::kNoneText);
  ordered_json record{
      {std::string(kIdField), sample.id},
      {std::string(kContextField), sample.context.combined()},
      {std::string(kPersonasField), sample.personas.entries()},
      {std::string(kThoughtsField), annotation.thought().value_or("")},
      {std::string(kScoreField), annotation.score().value()},
      {std::string(kToolsField), tools},
      {std::string(kResponseField), annotation.response().value_or(std::string(chainlang::kNoneText))}};
  if (sample.scenario) record[std::string(kScenarioField)] = *sample.scenario;
  if (!sample.media.empty()) record[std::string(kMediaField)] = sample.media;
  return record;
}

BenchmarkSample make_sample(std::string id, ContextBundle context, PersonaSet personas,
                            AgentOutput annotation, const ToolRegistry& registry,
                            std::optional<std::string> scenario) {
  BenchmarkSample sample;
  sample.id = std::move(id);
  sample.context = std::move(context);
  sample.personas = std::move(personas);
  sample.tools_text = chainlang::serialize_chain(annotation.chain(), registry);
  sample.annotation = std::move(annotation);
  sample.scenario = std::move(scenario);
  return sample;
}

Dataset parse(std::string_view text, std::string_view source) {
  Dataset dataset;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::size_t index = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto where = std::string(source) + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DecodeError(where + ": " + e.what());
    }
    if (index == 0 && dataset.samples.empty() && !dataset.scenarios && is_header(record)) {
      dataset.scenarios = header_scenarios(record, where);
      continue;
    }
    try {
      auto sample = decode_record(record, index, dataset.scenarios);
      if (!ids.insert(sample.id).second) {
        throw DecodeError("record " + std::to_string(index) + ": duplicate id '" + sample.id + "'");
      }
      dataset.samples.push_back(std::move(sample));
    } catch (const DecodeError& e) {
      throw DecodeError(where + ": " + e.what());
    }
    ++index;
  }
  return dataset;
}

Dataset load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

std::string serialize(const Dataset& dataset) {
  std::string out;
  if (dataset.scenarios) {
    out += ordered_json{{"header", {{"scenarios", *dataset.scenarios}}}}.dump() + "\n";
  }
  for (const auto& sample : dataset.samples) out += encode_record(sample).dump() + "\n";
  return out;
}

void save(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize(dataset);
}

// ------------------------------------------------------------- validation

namespace {

void finish_sample(ValidationReport& report, SampleDiagnostics entry) {
  for (const auto& d : entry.diagnostics) ++report.counts[d.kind];
  if (entry.diagnostics.empty()) {
    ++report.passed;
  } else {
    ++report.failed;
  }
  report.samples.push_back(std::move(entry));
}

void check_media(const BenchmarkSample& sample, const std::filesystem::path& root,
                 Diagnostics& out) {
  for (const auto& media : sample.media) {
    std::filesystem::path path(media);
    if (path.is_relative()) path = root / path;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
      out.push_back({DiagnosticKind::MediaMissing, std::nullopt, media, "media file not found"});
    }
  }
}

void check_scenario(const BenchmarkSample& sample,
                    const std::optional<std::vector<std::string>>& scenarios, Diagnostics& out) {
  if (!scenarios || !sample.scenario) return;
  if (std::find(scenarios->begin(), scenarios->end(), *sample.scenario) == scenarios->end()) {
    out.push_back({DiagnosticKind::UnknownScenario, std::nullopt, *sample.scenario,
                   "scenario is not declared in the header"});
  }
}

}  // namespace

ValidationReport validate(const Dataset& dataset, const ToolRegistry& registry,
                          const std::optional<std::filesystem::path>& media_root) {
  ValidationReport report;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& sample = dataset.samples[i];
    SampleDiagnostics entry{i, sample.id, {}};
    if (!ids.insert(sample.id).second) {
      entry.diagnostics.push_back({DiagnosticKind::DuplicateId, std::nullopt, sample.id, "id already used"});
    }
    if (sample.annotation.score().value() > 2 &&
        (sample.annotation.chain().empty() || !sample.annotation.response())) {
      entry.diagnostics.push_back({DiagnosticKind::ScoreChainMismatch, std::nullopt,
                                   std::string(kScoreField),
                                   "proactive score needs a tool chain and a response"});
    }
    if (blank(sample.context.combined())) {
      entry.diagnostics.push_back({DiagnosticKind::EmptyContext, std::nullopt,
                                   std::string(kContextField), "context is blank"});
    }
    check_scenario(sample, dataset.scenarios, entry.diagnostics);
    auto chain_diags = chainlang::validate_chain(sample.annotation.chain(), registry);
    entry.diagnostics.insert(entry.diagnostics.end(), chain_diags.begin(), chain_diags.end());
    if (media_root) check_media(sample, *media_root, entry.diagnostics);
    finish_sample(report, std::move(entry));
  }
  return report;
}

ValidationReport validate_file(const std::filesystem::path& path, const ToolRegistry& registry) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ValidationReport report;
  std::optional<std::vector<std::string>> scenarios;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  std::size_t index = 0;
  auto root = path.parent_path();
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto where = path.string() + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DecodeError(where + ": " + e.what());
    }
    if (!record.is_object()) throw DecodeError(where + ": record is not an object");
    if (index == 0 && report.samples.empty() && !scenarios && is_header(record)) {
      scenarios = header_scenarios(record, where);
      continue;
    }
    auto checked = check_record(record, index, scenarios);
    SampleDiagnostics entry{index, checked.id, std::move(checked.diagnostics)};
    if (!ids.insert(checked.id).second) {
      entry.diagnostics.push_back({DiagnosticKind::DuplicateId, std::nullopt, checked.id, "id already used"});
    }
    if (checked.chain) {
      auto chain_diags = chainlang::validate_chain(*checked.chain, registry);
      entry.diagnostics.insert(entry.diagnostics.end(), chain_diags.begin(), chain_diags.end());
    }
    if (checked.sample) check_media(*checked.sample, root, entry.diagnostics);
    finish_sample(report, std::move(entry));
    ++index;
  }
  return report;
}

std::string render_report(const ValidationReport& report) {
  std::ostringstream out;
  for (const auto& entry : report.samples) {
    for (const auto& d : entry.diagnostics) {
      out << "record " << entry.index << " (" << entry.id << "): " << format(d) << "\n";
    }
  }
  out << report.passed << " passed, " << report.failed << " failed";
  if (!report.counts.empty()) {
    out << " (";
    bool first = true;
    for (const auto& [kind, n] : report.counts) {
      out << (first ? "" : ", ") << to_string(kind) << ": " << n;
      first = false;
    }
    out << ")";
  }
  out << "\n";
  return out.str();
}

ordered_json report_to_json(const ValidationReport& report) {
  ordered_json samples = ordered_json::array();
  for (const auto& entry : report.samples) {
    ordered_json diags = ordered_json::array();
    for (const auto& d : entry.diagnostics) {
      ordered_json item{{"kind", std::string(to_string(d.kind))},
                        {"call_index", d.call_index ? ordered_json(*d.call_index) : ordered_json(nullptr)},
                        {"subject", d.subject},
                        {"message", d.message}};
      diags.push_back(std::move(item));
    }
    samples.push_back({{"index", entry.index}, {"id", entry.id}, {"diagnostics", diags}});
  }
  ordered_json counts = ordered_json::object();
  for (const auto& [kind, n] : report.counts) counts[std::string(to_string(kind))] = n;
  return {{"passed", report.passed}, {"failed", report.failed}, {"counts", counts}, {"samples", samples}};
}

// ------------------------------------------------------------------ split

namespace {

// Fisher-Yates with j = rng() % (i + 1), spelled out so the permutation does
// not depend on the standard library's distribution implementation.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

Split split(const Dataset& dataset, const SplitMode& mode) {
  Split out;
  out.train.scenarios = dataset.scenarios;
  out.test.scenarios = dataset.scenarios;
  const auto& samples = dataset.samples;

  if (const auto* ratio = std::get_if<RandomRatio>(&mode)) {
    if (!(ratio->train_fraction > 0.0 && ratio->train_fraction < 1.0)) {
      throw ConfigError("train fraction must be inside (0, 1)");
    }
    auto order = permutation(samples.size(), ratio->seed);
    auto n_train = static_cast<std::size_t>(
        std::llround(ratio->train_fraction * static_cast<double>(samples.size())));
    std::vector<bool> in_train(samples.size(), false);
    for (std::size_t k = 0; k < n_train; ++k) in_train[order[k]] = true;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      (in_train[i] ? out.train : out.test).samples.push_back(samples[i]);
    }
    return out;
  }

  const auto& holdout = std::get<ScenarioHoldout>(mode);
  std::set<std::string> known;
  if (dataset.scenarios) known.insert(dataset.scenarios->begin(), dataset.scenarios->end());
  for (const auto& sample : samples) {
    if (sample.scenario) known.insert(*sample.scenario);
  }
  std::set<std::string> held;
  for (const auto& label : holdout.held_out) {
    if (!known.contains(label)) throw UnknownScenario("scenario '" + label + "' is not in the dataset");
    held.insert(label);
  }
  for (const auto& sample : samples) {
    bool test = sample.scenario && held.contains(*sample.scenario);
    (test ? out.test : out.train).samples.push_back(sample);
  }
  return out;
}

// -------------------------------------------------------------------- SFT

SftRecord to_sft(const BenchmarkSample& sample, const ToolRegistry& registry) {
  ordered_json target{{"proactive_score", sample.annotation.score().value()},
                      {"tools", chainlang::chain_to_json(sample.annotation.chain(), registry)}};
  return {reasoner::build_runtime_prompt(sample.context, sample.personas),
          "<think>" + sample.annotation.thought().value_or("") + "</think>", target.dump()};
}

std::vector<SftRecord> export_sft(const Dataset& dataset, const ToolRegistry& registry) {
  auto report = validate(dataset, registry);
  if (!report.ok()) {
    throw ValidationFailed("dataset does not validate: " + render_report(report));
  }
  std::vector<SftRecord> records;
  records.reserve(dataset.samples.size());
  for (const auto& sample : dataset.samples) records.push_back(to_sft(sample, registry));
  return records;
}

void write_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) {
    out << ordered_json{{"input", r.input}, {"thought", r.thought}, {"target", r.target}}.dump() << "\n";
  }
}

// ------------------------------------------------------------------ stats

DatasetStats stats(const Dataset& dataset) {
  DatasetStats s;
  s.n_samples = dataset.samples.size();
  for (const auto& sample : dataset.samples) {
    ++s.by_scenario[sample.scenario.value_or("(none)")];
    ++s.by_score[sample.annotation.score().value()];
    ++s.by_chain_length[sample.annotation.chain().size()];
    for (const auto& call : sample.annotation.chain().calls()) ++s.by_tool[call.name()];
  }
  return s;
}

ordered_json stats_to_json(const DatasetStats& s) {
  ordered_json by_score = ordered_json::object();
  for (const auto& [k, v] : s.by_score) by_score[std::to_string(k)] = v;
  ordered_json by_length = ordered_json::object();
  for (const auto& [k, v] : s.by_chain_length) by_length[std::to_string(k)] = v;
  return {{"n_samples", s.n_samples},
          {"by_scenario", s.by_scenario},
          {"by_score", by_score},
          {"by_chain_length", by_length},
          {"by_tool", s.by_tool}};
}

std::string render_stats(const DatasetStats& s) {
  std::ostringstream out;
  out << "samples: " << s.n_samples << "\n";
  auto section = [&](const char* title, const auto& map) {
    out << "\n" << title << "\n";
    std::size_t width = 0;
    for (const auto& [k, v] : map) {
      std::ostringstream key;
      key << k;
      width = std::max(width, key.str().size());
    }
    for (const auto& [k, v] : map) {
      std::ostringstream key;
      key << k;
      out << "  " << key.str() << std::string(width - key.str().size(), ' ') << "  " << v << "\n";
    }
  };
  section("by scenario:", s.by_scenario);
  section("by proactive score:", s.by_score);
  section("by chain length:", s.by_chain_length);
  section("by tool:", s.by_tool);
  return out.str();
}

}  // namespace proagent::dataset
