#include <cstdio>
#include <fstream>

#include "http.hpp"
#include "proagent/reasoner.hpp"

namespace proagent::reasoner {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

BackendKind kind_from_text(const std::string& text) {
  if (text == "remote") return BackendKind::Remote;
  if (text == "replay") return BackendKind::Replay;
  if (text == "fixed_stub") return BackendKind::FixedStub;
  throw ConfigError("unknown backend kind '" + text + "' (expected remote, replay or fixed_stub)");
}

const char* kind_text(BackendKind kind) {
  switch (kind) {
    case BackendKind::Remote: return "remote";
    case BackendKind::Replay: return "replay";
    case BackendKind::FixedStub: return "fixed_stub";
  }
  return "?";
}

constexpr std::string_view kDigestPrefix = "digest:";

}  // namespace

void BackendConfig::check() const {
  switch (kind) {
    case BackendKind::Remote:
      if (endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
      if (model.empty()) throw ConfigError("remote backend needs a model id");
      detail::split_url(endpoint);
      if (temperature < 0) throw ConfigError("temperature must be >= 0");
      if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
      if (timeout_s <= 0) throw ConfigError("timeout_s must be positive");
      if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
      for (int delay : retry.backoff_ms) {
        if (delay < 0) throw ConfigError("retry.backoff_ms entries must be >= 0");
      }
      break;
    case BackendKind::Replay:
      if (transcript.empty()) throw ConfigError("replay backend needs a transcript path");
      break;
    case BackendKind::FixedStub:
      break;
  }
}

BackendConfig BackendConfig::from_json(const json& doc, const std::filesystem::path& base_dir) {
  try {
    BackendConfig config;
    config.kind = kind_from_text(doc.at("kind").get<std::string>());
    config.endpoint = doc.value("endpoint", "");
    config.model = doc.value("model", "");
    config.credential_env = doc.value("credential_env", "");
    config.temperature = doc.value("temperature", config.temperature);
    config.max_tokens = doc.value("max_tokens", config.max_tokens);
    config.timeout_s = doc.value("timeout_s", config.timeout_s);
    if (doc.contains("retry")) {
      const auto& retry = doc.at("retry");
      config.retry.max_attempts = retry.value("max_attempts", config.retry.max_attempts);
      if (retry.contains("backoff_ms")) {
        config.retry.backoff_ms = retry.at("backoff_ms").get<std::vector<int>>();
      }
    }
    if (doc.contains("transcript")) {
      std::filesystem::path transcript = doc.at("transcript").get<std::string>();
      config.transcript = transcript.is_relative() && !base_dir.empty() ? base_dir / transcript
                                                                         : transcript;
    }
    config.completion = doc.value("completion", "");
    config.check();
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("backend config: ") + e.what());
  }
}

BackendConfig BackendConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open backend config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(doc, path.parent_path());
}

ordered_json BackendConfig::to_json() const {
  ordered_json doc{{"kind", kind_text(kind)}};
  switch (kind) {
    case BackendKind::Remote:
      doc["endpoint"] = endpoint;
      doc["model"] = model;
      doc["credential_env"] = credential_env;
      doc["temperature"] = temperature;
      doc["max_tokens"] = max_tokens;
      doc["timeout_s"] = timeout_s;
      doc["retry"] = {{"max_attempts", retry.max_attempts}, {"backoff_ms", retry.backoff_ms}};
      break;
    case BackendKind::Replay:
      doc["transcript"] = transcript.string();
      break;
    case BackendKind::FixedStub:
      doc["completion"] = completion;
      break;
  }
  return doc;
}

std::string prompt_digest(std::string_view prompt) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : prompt) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

ReplayBackend ReplayBackend::load(const std::filesystem::path& transcript) {
  std::ifstream in(transcript);
  if (!in) throw IoError("cannot open transcript " + transcript.string());
  std::map<std::string, std::string> completions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = transcript.string() + ":" + std::to_string(line_no);
    try {
      auto record = json::parse(line);
      std::string key;
      if (record.contains("id")) {
        key = record.at("id").get<std::string>();
      } else {
        key = std::string(kDigestPrefix) + record.at("prompt_digest").get<std::string>();
      }
      if (!completions.emplace(key, record.at("completion").get<std::string>()).second) {
        throw DecodeError(where + ": duplicate transcript key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw DecodeError(where + ": " + e.what());
    }
  }
  return ReplayBackend(std::move(completions));
}

std::string ReplayBackend::generate(const GenerationRequest& request) {
  if (!request.key.empty()) {
    if (auto it = completions_.find(request.key); it != completions_.end()) return it->second;
  }
  auto digest = prompt_digest(request.prompt);
  if (auto it = completions_.find(std::string(kDigestPrefix) + digest); it != completions_.end()) {
    return it->second;
  }
  throw TranscriptMiss("no completion for key '" + request.key + "' or prompt digest " + digest);
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
  if (config_.kind != BackendKind::Remote) throw ConfigError("RemoteBackend needs a remote config");
  config_.check();
  token_ = detail::read_credential(config_.credential_env);
}

std::string RemoteBackend::generate(const GenerationRequest& request) {
  auto endpoint = detail::split_url(config_.endpoint);
  ordered_json body{{"model", config_.model},
                    {"messages", ordered_json::array({{{"role", "user"}, {"content", request.prompt}}})},
                    {"temperature", config_.temperature},
                    {"max_tokens", config_.max_tokens}};
  auto payload = body.dump();
  auto outcome = detail::with_retries(config_.retry.max_attempts, config_.retry.backoff_ms, [&] {
    auto client = detail::make_client(endpoint, config_.timeout_s, token_);
    return detail::outcome_of(client.Post(endpoint.path, payload, "application/json"));
  });
  if (!outcome.connected) {
    throw BackendUnavailable(config_.endpoint + " unreachable after " +
                             std::to_string(config_.retry.max_attempts) +
                             " attempts: " + outcome.error);
  }
  if (outcome.status != 200) {
    throw BackendUnavailable(config_.endpoint + " returned HTTP " + std::to_string(outcome.status) +
                             ": " + outcome.body.substr(0, 200));
  }
  try {
    auto reply = json::parse(outcome.body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendUnavailable(config_.endpoint + " sent an unexpected reply: " + e.what());
  }
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.check();
  switch (config.kind) {
    case BackendKind::Remote: return std::make_unique<RemoteBackend>(config);
    case BackendKind::Replay: return std::make_unique<ReplayBackend>(ReplayBackend::load(config.transcript));
    case BackendKind::FixedStub: return std::make_unique<FixedStubBackend>(config.completion);
  }
  throw ConfigError("unknown backend kind");
}

void write_ground_truth_transcript(const std::filesystem::path& path,
                                   const std::vector<BenchmarkSample>& samples,
                                   const ToolRegistry& registry) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& sample : samples) {
    out << ordered_json{{"id", sample.id}, {"completion", format_completion(sample.annotation, registry)}}
               .dump()
        << '\n';
    if (sample.annotation.response()) {
      out << ordered_json{{"id", sample.id + "#response"}, {"completion", *sample.annotation.response()}}
                 .dump()
          << '\n';
    }
  }
}

}  // namespace proagent::reasoner
