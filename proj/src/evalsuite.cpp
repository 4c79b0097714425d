#include "proagent/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "proagent/chainlang.hpp"

namespace proagent::evalsuite {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<Prediction> ground_truth(std::span<const BenchmarkSample> samples) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& sample : samples) {
    out.push_back({sample.id, sample.annotation.score(), sample.annotation.chain(), false});
  }
  return out;
}

Prediction prediction_from_json(const json& record) {
  try {
    Prediction prediction;
    prediction.id = record.at("id").get<std::string>();
    prediction.score = ProactiveScore(record.at("score").get<int>());
    const auto& tools = record.at("tools");
    prediction.chain = tools.is_string() ? chainlang::parse_chain(tools.get<std::string>())
                                         : chainlang::parse_chain_json(ordered_json(tools));
    prediction.failure = record.value("prediction_failure", false);
    return prediction;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("prediction record: ") + e.what());
  } catch (const InvalidScore& e) {
    throw DecodeError(std::string("prediction record: ") + e.what());
  }
}

ordered_json prediction_to_json(const Prediction& prediction, const ToolRegistry& registry) {
  ordered_json record{{"id", prediction.id},
                      {"score", prediction.score.value()},
                      {"tools", chainlang::serialize_chain(prediction.chain, registry,
                                                           chainlang::UnknownTools::OmitDesc)}};
  if (prediction.failure) record["prediction_failure"] = true;
  return record;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prediction_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DecodeError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw DecodeError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions,
                      const ToolRegistry& registry) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& prediction : predictions) {
    out << prediction_to_json(prediction, registry).dump() << '\n';
  }
}

double Ratio::value() const noexcept {
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(count) / static_cast<double>(total);
}

std::optional<double> ProactiveMetrics::rmse() const {
  if (n_samples == 0) return std::nullopt;
  return std::sqrt(static_cast<double>(squared_error_sum) / static_cast<double>(n_samples));
}

bool MetricsReport::operator==(const MetricsReport& other) const {
  return options == other.options && n_samples == other.n_samples &&
         n_prediction_failures == other.n_prediction_failures &&
         proactive == other.proactive && tools == other.tools && acc_args == other.acc_args &&
         levels == other.levels;
}

std::vector<Pair> align(std::span<const Prediction> predictions,
                        std::span<const Prediction> truth) {
  if (truth.empty() || predictions.empty()) {
    throw IdMismatch("nothing to evaluate: " + std::to_string(predictions.size()) +
                     " predictions, " + std::to_string(truth.size()) + " ground-truth samples");
  }
  std::unordered_map<std::string_view, const Prediction*> by_id;
  for (const auto& prediction : predictions) {
    if (!by_id.emplace(prediction.id, &prediction).second) {
      throw IdMismatch("duplicate prediction id '" + prediction.id + "'");
    }
  }
  std::vector<Pair> pairs;
  pairs.reserve(truth.size());
  std::set<std::string_view> seen;
  for (const auto& gt : truth) {
    if (!seen.insert(gt.id).second) throw IdMismatch("duplicate ground-truth id '" + gt.id + "'");
    auto it = by_id.find(gt.id);
    if (it == by_id.end()) throw IdMismatch("no prediction for id '" + gt.id + "'");
    pairs.push_back({it->second, &gt});
  }
  if (pairs.size() != predictions.size()) {
    for (const auto& prediction : predictions) {
      if (!seen.contains(prediction.id)) {
        throw IdMismatch("prediction id '" + prediction.id + "' is not in the ground truth");
      }
    }
  }
  return pairs;
}

namespace {

// Neumaier summation over values sorted first, so the result does not depend
// on sample order.
double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  double compensation = 0.0;
  for (double v : values) {
    double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

std::set<std::string> name_set(const ToolChain& chain) {
  std::set<std::string> names;
  for (const auto& call : chain.calls()) names.insert(call.name());
  return names;
}

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& name : a) n += b.contains(name);
  return n;
}

ProactiveMetrics proactive_on(const std::vector<Pair>& pairs, int boundary) {
  ProactiveMetrics m;
  const auto n = static_cast<std::int64_t>(pairs.size());
  m.n_samples = pairs.size();
  m.acc_p.total = m.md.total = m.fd.total = n;
  for (const auto& [prediction, truth] : pairs) {
    bool gt_positive = truth->score.value() >= boundary;
    bool pred_positive = prediction->score.value() >= boundary;
    if (gt_positive == pred_positive) {
      ++m.acc_p.count;
    } else if (gt_positive) {
      ++m.md.count;
    } else {
      ++m.fd.count;
    }
    std::int64_t diff = prediction->score.value() - truth->score.value();
    m.squared_error_sum += diff * diff;
  }
  return m;
}

ToolMetrics tools_on(const std::vector<Pair>& pairs, Averaging averaging) {
  ToolMetrics m;
  std::vector<double> precisions;
  std::vector<double> recalls;
  std::vector<double> f1s;
  std::int64_t hits = 0;
  std::int64_t predicted = 0;
  std::int64_t expected = 0;
  for (const auto& [prediction, truth] : pairs) {
    if (truth->chain.empty()) continue;
    ++m.n_tool_scored;
    auto gt = name_set(truth->chain);
    auto pred = name_set(prediction->chain);
    auto inter = intersection_size(pred, gt);
    hits += static_cast<std::int64_t>(inter);
    predicted += static_cast<std::int64_t>(pred.size());
    expected += static_cast<std::int64_t>(gt.size());

    double p = pred.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(pred.size());
    double r = static_cast<double>(inter) / static_cast<double>(gt.size());
    // 2PR/(P+R) reduces to 2|inter| / (|pred| + |gt|).
    double f = inter == 0 ? 0.0
                          : 2.0 * static_cast<double>(inter) /
                                static_cast<double>(pred.size() + gt.size());
    precisions.push_back(p);
    recalls.push_back(r);
    f1s.push_back(f);
  }
  if (m.n_tool_scored == 0) return m;

  if (averaging == Averaging::Macro) {
    auto n = static_cast<double>(m.n_tool_scored);
    m.precision = stable_sum(precisions) / n;
    m.recall = stable_sum(recalls) / n;
    m.f1 = stable_sum(f1s) / n;
  } else {
    double p = predicted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted);
    double r = static_cast<double>(hits) / static_cast<double>(expected);
    m.precision = p;
    m.recall = r;
    m.f1 = hits == 0 ? 0.0 : 2.0 * static_cast<double>(hits) / static_cast<double>(predicted + expected);
  }
  return m;
}

// Order-free signature of a call's args under the args_equal normalization.
std::string args_signature(const ToolCall& call) {
  std::vector<std::string> parts;
  for (const auto& [param, expr] : call.args()) {
    nlohmann::json part = expr.is_ref()
                              ? nlohmann::json{param, "ref", expr.as_ref().tool_name,
                                               expr.as_ref().field_name}
                              : nlohmann::json{param, "lit", normalize_key_text(expr.as_literal().text)};
    parts.push_back(part.dump());
  }
  std::sort(parts.begin(), parts.end());
  return nlohmann::json(parts).dump();
}

// Calls sharing a name are compared as multisets, so call order never matters.
bool tool_args_match(const ToolChain& predicted, const ToolChain& truth, const std::string& name) {
  auto signatures = [&](const ToolChain& chain) {
    std::vector<std::string> out;
    for (const auto& call : chain.calls()) {
      if (call.name() == name) out.push_back(args_signature(call));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  return signatures(predicted) == signatures(truth);
}

Ratio args_on(const std::vector<Pair>& pairs, ArgsGranularity granularity) {
  Ratio ratio;
  for (const auto& [prediction, truth] : pairs) {
    if (truth->chain.empty()) continue;
    auto gt = name_set(truth->chain);
    auto pred = name_set(prediction->chain);
    std::vector<std::string> matched;
    for (const auto& name : pred) {
      if (gt.contains(name)) matched.push_back(name);
    }
    if (matched.empty()) continue;
    if (granularity == ArgsGranularity::Sample) {
      ++ratio.total;
      bool all = std::all_of(matched.begin(), matched.end(), [&](const std::string& name) {
        return tool_args_match(prediction->chain, truth->chain, name);
      });
      ratio.count += all;
    } else {
      for (const auto& name : matched) {
        ++ratio.total;
        ratio.count += tool_args_match(prediction->chain, truth->chain, name);
      }
    }
  }
  return ratio;
}

MetricsReport evaluate_pairs(const std::vector<Pair>& pairs, const Options& options) {
  MetricsReport report;
  report.options = options;
  report.options.levels = false;
  report.n_samples = pairs.size();
  for (const auto& pair : pairs) report.n_prediction_failures += pair.prediction->failure;
  report.proactive = proactive_on(pairs, options.boundary);
  report.tools = tools_on(pairs, options.averaging);
  report.acc_args = args_on(pairs, options.args_granularity);
  return report;
}

}  // namespace

bool args_equal(const ToolCall& predicted, const ToolCall& truth) {
  return args_signature(predicted) == args_signature(truth);
}

ProactiveMetrics proactive_metrics(std::span<const Prediction> predictions,
                                   std::span<const Prediction> truth, int boundary) {
  return proactive_on(align(predictions, truth), boundary);
}

ToolMetrics tool_metrics(std::span<const Prediction> predictions, std::span<const Prediction> truth,
                         Averaging averaging) {
  return tools_on(align(predictions, truth), averaging);
}

Ratio args_accuracy(std::span<const Prediction> predictions, std::span<const Prediction> truth,
                    ArgsGranularity granularity) {
  return args_on(align(predictions, truth), granularity);
}

int chain_level(std::size_t chain_length) noexcept {
  if (chain_length <= 1) return 1;
  if (chain_length == 2) return 2;
  return 3;
}

namespace {

std::vector<LevelReport> levels_of(const std::vector<Pair>& pairs, const Options& options) {
  std::vector<LevelReport> levels{{1, 0, 1, {}}, {2, 2, 2, {}}, {3, 3, 5, {}}};
  std::vector<std::vector<Pair>> buckets(3);
  for (const auto& pair : pairs) {
    buckets[static_cast<std::size_t>(chain_level(pair.truth->chain.size()) - 1)].push_back(pair);
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    levels[i].metrics = evaluate_pairs(buckets[i], options);
  }
  return levels;
}

}  // namespace

std::vector<LevelReport> level_breakdown(std::span<const Prediction> predictions,
                                         std::span<const Prediction> truth,
                                         const Options& options) {
  return levels_of(align(predictions, truth), options);
}

MetricsReport evaluate(std::span<const Prediction> predictions, std::span<const Prediction> truth,
                       const Options& options) {
  auto pairs = align(predictions, truth);
  auto report = evaluate_pairs(pairs, options);
  report.options.levels = options.levels;
  if (options.levels) report.levels = levels_of(pairs, options);
  return report;
}

namespace {

ordered_json optional_number(std::optional<double> value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

ordered_json ratio_value(const Ratio& ratio) {
  return ratio.defined() ? ordered_json(ratio.value()) : ordered_json(nullptr);
}

std::optional<double> read_optional(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<double>();
}

const char* averaging_name(Averaging a) { return a == Averaging::Macro ? "macro" : "micro"; }
const char* granularity_name(ArgsGranularity g) {
  return g == ArgsGranularity::Sample ? "sample" : "tool";
}

ordered_json metrics_body(const MetricsReport& report) {
  const auto& p = report.proactive;
  return ordered_json{
      {"n_samples", report.n_samples},
      {"n_prediction_failures", report.n_prediction_failures},
      {"acc_p", ratio_value(p.acc_p)},
      {"md", ratio_value(p.md)},
      {"fd", ratio_value(p.fd)},
      {"rmse", optional_number(p.rmse())},
      {"precision", optional_number(report.tools.precision)},
      {"recall", optional_number(report.tools.recall)},
      {"f1", optional_number(report.tools.f1)},
      {"acc_args", ratio_value(report.acc_args)},
      {"n_tool_scored", report.tools.n_tool_scored},
      {"n_args_scored", report.acc_args.total},
      {"counts",
       {{"acc_p", p.acc_p.count},
        {"md", p.md.count},
        {"fd", p.fd.count},
        {"squared_error_sum", p.squared_error_sum},
        {"args_correct", report.acc_args.count}}}};
}

MetricsReport metrics_from_body(const json& doc, const Options& options) {
  MetricsReport report;
  report.options = options;
  report.n_samples = doc.at("n_samples").get<std::size_t>();
  report.n_prediction_failures = doc.at("n_prediction_failures").get<std::size_t>();
  const auto& counts = doc.at("counts");
  auto n = static_cast<std::int64_t>(report.n_samples);
  auto& p = report.proactive;
  p.n_samples = report.n_samples;
  p.acc_p = {counts.at("acc_p").get<std::int64_t>(), n};
  p.md = {counts.at("md").get<std::int64_t>(), n};
  p.fd = {counts.at("fd").get<std::int64_t>(), n};
  p.squared_error_sum = counts.at("squared_error_sum").get<std::int64_t>();
  report.tools.precision = read_optional(doc, "precision");
  report.tools.recall = read_optional(doc, "recall");
  report.tools.f1 = read_optional(doc, "f1");
  report.tools.n_tool_scored = doc.at("n_tool_scored").get<std::size_t>();
  report.acc_args = {counts.at("args_correct").get<std::int64_t>(),
                     doc.at("n_args_scored").get<std::int64_t>()};
  return report;
}

}  // namespace

ordered_json report_to_json(const MetricsReport& report) {
  ordered_json doc{{"averaging", averaging_name(report.options.averaging)},
                   {"args_granularity", granularity_name(report.options.args_granularity)},
                   {"boundary", report.options.boundary}};
  doc.update(metrics_body(report));
  if (report.options.levels) {
    ordered_json levels = ordered_json::array();
    for (const auto& level : report.levels) {
      ordered_json entry{{"level", level.level},
                         {"min_tools", level.min_tools},
                         {"max_tools", level.max_tools}};
      entry.update(metrics_body(level.metrics));
      levels.push_back(std::move(entry));
    }
    doc["levels"] = std::move(levels);
  }
  return doc;
}

MetricsReport report_from_json(const json& doc) {
  try {
    Options options;
    options.averaging = doc.at("averaging") == "micro" ? Averaging::Micro : Averaging::Macro;
    options.args_granularity =
        doc.at("args_granularity") == "tool" ? ArgsGranularity::Tool : ArgsGranularity::Sample;
    options.boundary = doc.at("boundary").get<int>();
    Options level_options = options;
    options.levels = doc.contains("levels");
    auto report = metrics_from_body(doc, options);
    if (options.levels) {
      for (const auto& entry : doc.at("levels")) {
        report.levels.push_back({entry.at("level").get<int>(),
                                 entry.at("min_tools").get<std::size_t>(),
                                 entry.at("max_tools").get<std::size_t>(),
                                 metrics_from_body(entry, level_options)});
      }
    }
    return report;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("metrics report: ") + e.what());
  }
}

std::string format_metric(std::optional<double> value) {
  if (!value || std::isnan(*value)) return "-";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3f", *value);
  return buffer;
}

namespace {

std::optional<double> ratio_opt(const Ratio& r) {
  return r.defined() ? std::optional<double>(r.value()) : std::nullopt;
}

}  // namespace

std::string render_table(const MetricsReport& report) {
  std::vector<std::string> headers{"Metric", "All"};
  std::vector<const MetricsReport*> columns{&report};
  for (const auto& level : report.levels) {
    std::string range = level.min_tools == level.max_tools
                            ? std::to_string(level.min_tools)
                            : std::to_string(level.min_tools) + "-" + std::to_string(level.max_tools);
    headers.push_back("L" + std::to_string(level.level) + " (" + range + ")");
    columns.push_back(&level.metrics);
  }

  using Getter = std::string (*)(const MetricsReport&);
  const std::vector<std::pair<std::string, Getter>> rows = {
      {"Acc-P", [](const MetricsReport& r) { return format_metric(ratio_opt(r.proactive.acc_p)); }},
      {"MD", [](const MetricsReport& r) { return format_metric(ratio_opt(r.proactive.md)); }},
      {"FD", [](const MetricsReport& r) { return format_metric(ratio_opt(r.proactive.fd)); }},
      {"RMSE", [](const MetricsReport& r) { return format_metric(r.proactive.rmse()); }},
      {"Precision", [](const MetricsReport& r) { return format_metric(r.tools.precision); }},
      {"Recall", [](const MetricsReport& r) { return format_metric(r.tools.recall); }},
      {"F1", [](const MetricsReport& r) { return format_metric(r.tools.f1); }},
      {"Acc-Args", [](const MetricsReport& r) { return format_metric(ratio_opt(r.acc_args)); }},
      {"samples", [](const MetricsReport& r) { return std::to_string(r.n_samples); }},
      {"tool-scored", [](const MetricsReport& r) { return std::to_string(r.tools.n_tool_scored); }},
      {"args-scored", [](const MetricsReport& r) { return std::to_string(r.acc_args.total); }},
  };

  std::vector<std::vector<std::string>> cells{headers};
  for (const auto& [name, getter] : rows) {
    std::vector<std::string> line{name};
    for (const auto* column : columns) line.push_back(getter(*column));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(headers.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }

  std::ostringstream out;
  out << "# averaging: " << averaging_name(report.options.averaging)
      << ", acc-args: " << granularity_name(report.options.args_granularity)
      << "-level, boundary: score >= " << report.options.boundary
      << ", prediction failures: " << report.n_prediction_failures << "\n";
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c) out << "  ";
      const auto& text = cells[r][c];
      if (c == 0) {
        out << text << std::string(widths[c] - text.size(), ' ');
      } else {
        out << std::string(widths[c] - text.size(), ' ') << text;
      }
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace proagent::evalsuite
