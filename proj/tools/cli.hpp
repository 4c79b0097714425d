#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "proagent/reasoner.hpp"

namespace proagent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitFailure = 2;

struct RunConfig {
  std::filesystem::path dataset;
  /// Empty for the built-in registry.
  std::filesystem::path registry;
  std::filesystem::path fixture;
  reasoner::BackendConfig backend;
  /// Response synthesis backend; the reasoning backend when absent.
  std::optional<reasoner::BackendConfig> synthesis;
  int gate_threshold = GateConfig::kDefaultThreshold;
  std::size_t parallelism = 1;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Throws ConfigError for a missing path or zero parallelism.
  void check() const;

  /// Relative paths resolve against `base_dir`. "backend" may be an object or
  /// the path of a backend config file.
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
};

/// Entry point behind the `proagent` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace proagent::cli
