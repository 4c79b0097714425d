#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "proagent/core.hpp"
#include "proagent/diagnostics.hpp"
#include "proagent/reasoner.hpp"
#include "proagent/toolset.hpp"

namespace proagent::dataset {

// Record field names, bit-exact.
inline constexpr std::string_view kContextField = "Context information";
inline constexpr std::string_view kPersonasField = "Personas";
inline constexpr std::string_view kThoughtsField = "Thoughts";
inline constexpr std::string_view kScoreField = "Proactive score";
inline constexpr std::string_view kToolsField = "Tools";
inline constexpr std::string_view kResponseField = "Response";
inline constexpr std::string_view kScenarioField = "Scenario";
inline constexpr std::string_view kMediaField = "Media";
inline constexpr std::string_view kIdField = "id";

struct Dataset {
  /// Scenario labels declared by the optional header line.
  std::optional<std::vector<std::string>> scenarios;
  std::vector<BenchmarkSample> samples;

  bool operator==(const Dataset&) const = default;
};

/// Result of checking one record against the schema.
struct RecordCheck {
  std::string id;
  Diagnostics diagnostics;
  /// Decoded "Tools", when that field alone decodes.
  std::optional<ToolChain> chain;
  /// Present only when there are no schema diagnostics.
  std::optional<BenchmarkSample> sample;
};

/// Lenient decode: every schema problem becomes a diagnostic. `index` is
/// 0-based; absent ids default to "sample-<index+1>".
RecordCheck check_record(const nlohmann::json& record, std::size_t index,
                         const std::optional<std::vector<std::string>>& scenarios = std::nullopt);

/// Strict decode. Throws DecodeError naming the record index and field.
BenchmarkSample decode_record(const nlohmann::json& record, std::size_t index,
                              const std::optional<std::vector<std::string>>& scenarios = std::nullopt);
nlohmann::ordered_json encode_record(const BenchmarkSample& sample);

/// Builds a sample with a canonical "Tools" text from the registry.
BenchmarkSample make_sample(std::string id, ContextBundle context, PersonaSet personas,
                            AgentOutput annotation, const ToolRegistry& registry,
                            std::optional<std::string> scenario = std::nullopt);

/// Strict load. Throws IoError, or DecodeError on any schema violation
/// (including duplicate ids and undeclared scenarios).
Dataset load(const std::filesystem::path& path);
Dataset parse(std::string_view text, std::string_view source = "<memory>");
void save(const std::filesystem::path& path, const Dataset& dataset);
std::string serialize(const Dataset& dataset);

struct SampleDiagnostics {
  std::size_t index = 0;
  std::string id;
  Diagnostics diagnostics;
};

struct ValidationReport {
  /// Every sample, passing or not, in file order.
  std::vector<SampleDiagnostics> samples;
  std::map<DiagnosticKind, std::size_t> counts;
  std::size_t passed = 0;
  std::size_t failed = 0;

  bool ok() const noexcept { return failed == 0; }
};

/// Registry and reference checks, plus media existence relative to `media_root`
/// when given.
ValidationReport validate(const Dataset& dataset, const ToolRegistry& registry,
                          const std::optional<std::filesystem::path>& media_root = std::nullopt);

/// Lenient file validation: schema problems become diagnostics. Throws
/// IoError when unreadable and DecodeError for lines that are not JSON objects.
ValidationReport validate_file(const std::filesystem::path& path, const ToolRegistry& registry);

std::string render_report(const ValidationReport& report);
nlohmann::ordered_json report_to_json(const ValidationReport& report);

// ------------------------------------------------------------------ split

struct RandomRatio {
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
};
struct ScenarioHoldout {
  std::vector<std::string> held_out;
};
using SplitMode = std::variant<RandomRatio, ScenarioHoldout>;

struct Split {
  Dataset train;
  Dataset test;
};

/// Deterministic for a given mode; both parts keep the original order.
/// Throws ConfigError for a fraction outside (0, 1) and UnknownScenario.
Split split(const Dataset& dataset, const SplitMode& mode);

// -------------------------------------------------------------------- SFT

struct SftRecord {
  std::string input;
  std::string thought;
  std::string target;
  bool operator==(const SftRecord&) const = default;
};

SftRecord to_sft(const BenchmarkSample& sample, const ToolRegistry& registry);
/// Throws ValidationFailed when the dataset does not validate.
std::vector<SftRecord> export_sft(const Dataset& dataset, const ToolRegistry& registry);
void write_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records);

// ------------------------------------------------------------------ stats

struct DatasetStats {
  std::size_t n_samples = 0;
  std::map<std::string, std::size_t> by_scenario;
  std::map<int, std::size_t> by_score;
  std::map<std::size_t, std::size_t> by_chain_length;
  std::map<std::string, std::size_t> by_tool;

  bool operator==(const DatasetStats&) const = default;
};

/// Samples without a scenario count under "(none)"; tool counts are per call.
DatasetStats stats(const Dataset& dataset);
nlohmann::ordered_json stats_to_json(const DatasetStats& stats);
std::string render_stats(const DatasetStats& stats);

// ------------------------------------------------------------- generation

struct ScenarioAware {
  std::string label;
};
struct ScoreAware {
  int score = 1;
};
using Strategy = std::variant<ScenarioAware, ScoreAware>;

struct GenerationJob {
  Strategy strategy;
  std::vector<BenchmarkSample> exemplars;
  std::vector<std::string> persona_pool;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  /// Candidates that may be examined; 0 means 5 x count.
  std::size_t attempt_budget = 0;
  std::size_t parallelism = 1;
  std::size_t exemplars_per_prompt = 3;
  std::size_t personas_per_prompt = 5;
  /// Scenario labels accepted candidates must use, when set.
  std::optional<std::vector<std::string>> scenarios;
  std::string id_prefix = "gen";

  /// Throws ConfigError when the score is outside [1, 5], the exemplar pool
  /// is empty, or count / parallelism is zero.
  void check() const;
};

enum class RejectReason { DecodeError, Invalid, Duplicate, StrategyMismatch };
std::string_view to_string(RejectReason reason) noexcept;

struct Rejection {
  /// Backend call and candidate position within its reply.
  std::size_t call = 0;
  std::size_t candidate = 0;
  RejectReason reason = RejectReason::DecodeError;
  std::string detail;
  std::string raw;
};

enum class GenerationStatus { Complete, AttemptBudgetExhausted, BackendUnavailable };
std::string_view to_string(GenerationStatus status) noexcept;

struct GenerationResult {
  GenerationStatus status = GenerationStatus::Complete;
  std::vector<BenchmarkSample> accepted;
  std::vector<Rejection> rejected;
  std::size_t calls = 0;
  std::size_t candidates_seen = 0;
  /// Why the stream ended early, if it did.
  std::string stop_reason;
};

/// Normalized-context digest used for deduplication.
std::string context_digest(std::string_view context);

std::string build_generation_prompt(const GenerationJob& job, const ToolRegistry& registry,
                                    std::size_t call);

/// Splits a reply into candidate records: a JSON array, or one JSON value per
/// line (code fences ignored). Unparseable lines come back as raw text.
std::vector<std::variant<nlohmann::json, std::string>> split_candidates(std::string_view reply);

/// Backend calls use Replay keys "gen-<call>"; a TranscriptMiss ends the stream.
GenerationResult generate(const GenerationJob& job, reasoner::Backend& backend,
                          const ToolRegistry& registry);

/// One persona per non-blank line.
std::vector<std::string> load_persona_pool(const std::filesystem::path& path);

}  // namespace proagent::dataset
