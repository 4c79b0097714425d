#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "proagent/core.hpp"
#include "proagent/toolset.hpp"

namespace proagent::evalsuite {

struct Prediction {
  std::string id;
  ProactiveScore score{1};
  ToolChain chain;
  /// The completion could not be parsed; score/chain hold the fallback.
  bool failure = false;

  bool operator==(const Prediction&) const = default;
};

/// Ground truth in the same shape as predictions.
std::vector<Prediction> ground_truth(std::span<const BenchmarkSample> samples);

/// Line-delimited {"id", "score", "tools", "prediction_failure"?}; "tools"
/// uses the chain wire format (text or an already-decoded array).
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions,
                      const ToolRegistry& registry);
nlohmann::ordered_json prediction_to_json(const Prediction& prediction,
                                          const ToolRegistry& registry);
Prediction prediction_from_json(const nlohmann::json& record);

/// Exact count-over-total fraction.
struct Ratio {
  std::int64_t count = 0;
  std::int64_t total = 0;

  bool defined() const noexcept { return total > 0; }
  /// NaN when undefined.
  double value() const noexcept;
  bool operator==(const Ratio&) const = default;
};

enum class Averaging { Macro, Micro };
enum class ArgsGranularity { Sample, Tool };

struct Options {
  int boundary = kProactiveBoundary;
  Averaging averaging = Averaging::Macro;
  ArgsGranularity args_granularity = ArgsGranularity::Sample;
  bool levels = false;

  bool operator==(const Options&) const = default;
};

struct ProactiveMetrics {
  Ratio acc_p;
  Ratio md;
  Ratio fd;
  std::int64_t squared_error_sum = 0;
  std::size_t n_samples = 0;

  std::optional<double> rmse() const;
  bool operator==(const ProactiveMetrics&) const = default;
};

struct ToolMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::size_t n_tool_scored = 0;
  bool operator==(const ToolMetrics&) const = default;
};

struct LevelReport;

struct MetricsReport {
  Options options;
  std::size_t n_samples = 0;
  std::size_t n_prediction_failures = 0;
  ProactiveMetrics proactive;
  ToolMetrics tools;
  /// total = n_args_scored (samples, or matched tools at tool granularity).
  Ratio acc_args;
  std::vector<LevelReport> levels;

  bool operator==(const MetricsReport&) const;
};

struct LevelReport {
  int level = 0;
  std::size_t min_tools = 0;
  std::size_t max_tools = 0;
  MetricsReport metrics;
  bool operator==(const LevelReport&) const = default;
};

/// Matches predictions to ground truth by id. Throws IdMismatch on duplicate,
/// missing or extra ids, or when there is nothing to evaluate.
struct Pair {
  const Prediction* prediction;
  const Prediction* truth;
};
std::vector<Pair> align(std::span<const Prediction> predictions, std::span<const Prediction> truth);

ProactiveMetrics proactive_metrics(std::span<const Prediction> predictions,
                                   std::span<const Prediction> truth,
                                   int boundary = kProactiveBoundary);
ToolMetrics tool_metrics(std::span<const Prediction> predictions, std::span<const Prediction> truth,
                         Averaging averaging = Averaging::Macro);
Ratio args_accuracy(std::span<const Prediction> predictions, std::span<const Prediction> truth,
                    ArgsGranularity granularity = ArgsGranularity::Sample);

/// Args equality after normalization: literals trimmed and case-folded,
/// references compared structurally, param order ignored.
bool args_equal(const ToolCall& predicted, const ToolCall& truth);

/// Level 1: 0-1 tools, level 2: 2 tools, level 3: 3 or more (3-5 in the benchmark).
int chain_level(std::size_t chain_length) noexcept;
std::vector<LevelReport> level_breakdown(std::span<const Prediction> predictions,
                                         std::span<const Prediction> truth,
                                         const Options& options = {});

/// The full suite, plus level sub-reports when options.levels is set.
MetricsReport evaluate(std::span<const Prediction> predictions, std::span<const Prediction> truth,
                       const Options& options = {});

nlohmann::ordered_json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);
/// Aligned plain-text table, values rounded to 3 decimals.
std::string render_table(const MetricsReport& report);
/// "0.874" style rounding; "-" for undefined values.
std::string format_metric(std::optional<double> value);

}  // namespace proagent::evalsuite
