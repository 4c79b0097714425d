#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "proagent/core.hpp"
#include "proagent/diagnostics.hpp"
#include "proagent/executor.hpp"
#include "proagent/toolset.hpp"

namespace proagent::reasoner {

// ---------------------------------------------------------------- prompts

inline constexpr std::string_view kNoPersonaMarker = "(no persona available)";

/// Task instructions with the 1-5 score semantics, one block per tool and
/// the required completion format. Identical for a fixed registry.
std::string build_static_prompt(const ToolRegistry& registry);

/// Personas section (or the no-persona marker) followed by the context verbatim.
std::string build_runtime_prompt(const ContextBundle& context, const PersonaSet& personas);

/// "### <name>" block with description, params and output fields.
std::string render_tool_block(const ToolDescriptor& tool);

struct PromptBundle {
  std::string static_part;
  std::string runtime_part;

  std::string rendered() const;
};

PromptBundle build_prompt(const ToolRegistry& registry, const BenchmarkSample& sample);

/// Completion in the canonical output format:
///   <think>...</think>
///   {"proactive_score": N, "tools": [...] | "None", "response": "..." | "None"}
std::string format_completion(const AgentOutput& output, const ToolRegistry& registry);

// --------------------------------------------------------------- backends

enum class BackendKind { Remote, Replay, FixedStub };

struct RetryPolicy {
  int max_attempts = 3;
  /// Delay before attempt i+1 is backoff_ms[min(i, size-1)].
  std::vector<int> backoff_ms{500, 2000};
  bool operator==(const RetryPolicy&) const = default;
};

struct BackendConfig {
  BackendKind kind = BackendKind::FixedStub;
  // Remote.
  std::string endpoint;
  std::string model;
  /// Name of the environment variable holding the bearer token; empty for none.
  std::string credential_env;
  double temperature = 0.0;
  int max_tokens = 1024;
  double timeout_s = 60.0;
  RetryPolicy retry;
  // Replay.
  std::filesystem::path transcript;
  // FixedStub.
  std::string completion;

  /// Throws ConfigError when the kind's required settings are missing.
  void check() const;

  /// Relative transcript paths resolve against `base_dir`.
  static BackendConfig from_json(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir = {});
  static BackendConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  bool operator==(const BackendConfig&) const = default;
};

struct GenerationRequest {
  std::string prompt;
  /// Replay lookup key (sample id, "<id>#response", "gen-<n>"); optional.
  std::string key;
};

/// Text generation. Implementations are safe for concurrent generate calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const noexcept = 0;
  /// Throws BackendUnavailable, TranscriptMiss or CredentialMissing.
  virtual std::string generate(const GenerationRequest& request) = 0;
};

class FixedStubBackend final : public Backend {
 public:
  explicit FixedStubBackend(std::string completion) : completion_(std::move(completion)) {}
  BackendKind kind() const noexcept override { return BackendKind::FixedStub; }
  std::string generate(const GenerationRequest&) override { return completion_; }

 private:
  std::string completion_;
};

/// 16 hex digits of a 64-bit FNV-1a hash.
std::string prompt_digest(std::string_view prompt);

/// Canned completions keyed by request key, falling back to the prompt digest.
/// Transcript: one {"id" | "prompt_digest", "completion"} record per line.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::map<std::string, std::string> completions)
      : completions_(std::move(completions)) {}
  static ReplayBackend load(const std::filesystem::path& transcript);

  BackendKind kind() const noexcept override { return BackendKind::Replay; }
  std::string generate(const GenerationRequest& request) override;
  std::size_t size() const noexcept { return completions_.size(); }

 private:
  std::map<std::string, std::string> completions_;
};

/// Chat-completions client. Retries connection errors, 429 and 5xx.
class RemoteBackend final : public Backend {
 public:
  /// Throws ConfigError, or CredentialMissing when credential_env is unset.
  explicit RemoteBackend(BackendConfig config);

  BackendKind kind() const noexcept override { return BackendKind::Remote; }
  std::string generate(const GenerationRequest& request) override;

 private:
  BackendConfig config_;
  std::string token_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// Writes a transcript whose completions reproduce each sample's annotation,
/// plus "<id>#response" entries carrying the annotated responses.
void write_ground_truth_transcript(const std::filesystem::path& path,
                                   const std::vector<BenchmarkSample>& samples,
                                   const ToolRegistry& registry);

// ---------------------------------------------------------------- parsing

enum class ParseStatus { Clean, Repaired, Failed };
std::string_view to_string(ParseStatus status) noexcept;

struct ParsedOutput {
  std::optional<std::string> thought;
  ParseStatus status = ParseStatus::Failed;
  /// Repairs applied (Repaired) or the failure reason (Failed), e.g. "NoScore".
  std::vector<std::string> notes;
  /// Present unless Failed; always satisfies AgentOutput invariants.
  std::optional<AgentOutput> output;
};

/// Never throws. Repair ladder: strip code fences, first decodable record
/// carrying a score, then a "proactive score: N" pattern.
ParsedOutput parse_output(std::string_view completion);

// --------------------------------------------------------------- pipeline

struct SampleRun {
  std::string id;
  AgentOutput output = AgentOutput::non_proactive();
  bool prediction_failure = false;
  ParseStatus parse_status = ParseStatus::Failed;
  std::vector<std::string> parse_notes;
  /// Set when generation itself failed (error code and message).
  std::optional<std::string> backend_error;
  Diagnostics chain_diagnostics;
  std::optional<executor::ExecutionTrace> trace;
  std::optional<std::string> response;
  /// "backend" or "template" when a response was produced.
  std::optional<std::string> response_source;
  std::chrono::milliseconds elapsed{0};
};

struct RunOptions {
  GateConfig gate;
  /// Backend for the final response; the reasoning backend when null.
  Backend* synthesis = nullptr;
};

/// Reason over one sample, then execute and synthesize when the gate opens.
/// Backend errors become sample-level failures; nothing is thrown.
SampleRun run_sample(const BenchmarkSample& sample, Backend& backend,
                     const ToolRegistry& registry, const WorldFixture& fixture,
                     const RunOptions& options = {});

std::string build_synthesis_prompt(const BenchmarkSample& sample, const AgentOutput& output,
                                   const executor::ExecutionTrace& trace);
/// Deterministic response rendered from tool results.
std::string template_response(const executor::ExecutionTrace& trace);

nlohmann::ordered_json run_to_json(const SampleRun& run, const ToolRegistry& registry);

// ------------------------------------------------------------- perception

enum class PerceptionMode { Passthrough, Stub, Remote };

struct PerceptionConfig {
  PerceptionMode mode = PerceptionMode::Passthrough;
  /// Stub mode output.
  std::string canned;
  std::string endpoint;
  std::string model;
  std::string credential_env;
  double timeout_s = 60.0;
  /// Exemplar descriptions for the visual ICL prompt; five by default.
  std::vector<std::string> exemplars;

  static PerceptionConfig from_json(const nlohmann::json& doc);
};

struct MediaInput {
  std::optional<std::filesystem::path> path;
  /// Already-extracted text, returned unchanged in passthrough mode.
  std::optional<std::string> text;
};

const std::vector<std::string>& default_visual_exemplars();
std::string build_visual_prompt(const std::vector<std::string>& exemplars);

/// Throws ClientUnavailable, UnsupportedMedia or IoError.
std::string extract_visual(const MediaInput& media, const PerceptionConfig& config);
std::string extract_audio(const MediaInput& media, const PerceptionConfig& config);

}  // namespace proagent::reasoner
