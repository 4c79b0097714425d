#include "http.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "proagent/error.hpp"

namespace proagent::detail {

Endpoint split_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("endpoint '" + std::string(url) + "' has no scheme");
  }
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("endpoint '" + std::string(url) + "' must use http or https");
  }
  auto host_start = scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == host_start || host_start == url.size()) {
    throw ConfigError("endpoint '" + std::string(url) + "' has no host");
  }
  if (path_start == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::string read_credential(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* value = std::getenv(env_name.c_str());
  if (!value || !*value) {
    throw CredentialMissing("environment variable " + env_name + " is not set");
  }
  return value;
}

httplib::Client make_client(const Endpoint& endpoint, double timeout_s, const std::string& token) {
  httplib::Client client(endpoint.origin);
  auto seconds = static_cast<time_t>(timeout_s);
  auto micros = static_cast<time_t>((timeout_s - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  if (!token.empty()) client.set_bearer_token_auth(token);
  return client;
}

HttpOutcome outcome_of(const httplib::Result& result) {
  HttpOutcome outcome;
  if (!result) {
    outcome.error = httplib::to_string(result.error());
    return outcome;
  }
  outcome.connected = true;
  outcome.status = result->status;
  outcome.body = result->body;
  return outcome;
}

HttpOutcome with_retries(int max_attempts, const std::vector<int>& backoff_ms,
                         const std::function<HttpOutcome()>& attempt) {
  HttpOutcome outcome;
  for (int i = 0; i < std::max(1, max_attempts); ++i) {
    if (i > 0 && !backoff_ms.empty()) {
      auto delay = backoff_ms[std::min<std::size_t>(static_cast<std::size_t>(i - 1), backoff_ms.size() - 1)];
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    outcome = attempt();
    if (!is_transient(outcome)) break;
  }
  return outcome;
}

}  // namespace proagent::detail
