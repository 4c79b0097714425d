#pragma once

// Shared plumbing for the chat-completions and perception clients.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "httplib.h"

namespace proagent::detail {

struct Endpoint {
  /// scheme://host[:port]
  std::string origin;
  /// Request path, "/" when the URL has none.
  std::string path;
};

/// Throws ConfigError for URLs without an http(s) scheme or host.
Endpoint split_url(std::string_view url);

/// Empty when `env_name` is empty; throws CredentialMissing when it names an
/// unset or empty variable.
std::string read_credential(const std::string& env_name);

httplib::Client make_client(const Endpoint& endpoint, double timeout_s, const std::string& token);

struct HttpOutcome {
  bool connected = false;
  int status = 0;
  std::string body;
  std::string error;
};

inline bool is_transient(const HttpOutcome& outcome) {
  return !outcome.connected || outcome.status == 429 || outcome.status >= 500;
}

/// Calls `attempt` until it succeeds or a non-transient response arrives,
/// sleeping per `backoff_ms` between tries. Returns the last outcome.
HttpOutcome with_retries(int max_attempts, const std::vector<int>& backoff_ms,
                         const std::function<HttpOutcome()>& attempt);

HttpOutcome outcome_of(const httplib::Result& result);

}  // namespace proagent::detail
