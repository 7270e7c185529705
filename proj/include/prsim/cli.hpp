#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prsim/policies.hpp"
#include "prsim/render.hpp"
#include "prsim/scenarios.hpp"

namespace prsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInvalid = 2;

// The CLI config document: {"scenario": .., "physics": .., "policy": ..,
// "render": ..}.
struct CliConfig {
  ScenarioConfig scenario;
  PolicyConfig policy;
  Camera camera;
};

// Bad input found while assembling a config, tagged with the exit code it
// maps to.
struct ConfigError {
  int exit_code;
  std::string message;
};

nlohmann::json default_config_document();

// Overlays `doc` onto the defaults, then applies "a.b.c=value" overrides
// (value parsed as JSON, else taken as a string). Override paths must name
// an existing key. Throws ConfigError.
nlohmann::json merge_config_document(const nlohmann::json& doc,
                                     const std::vector<std::string>& overrides);

// Parses and validates a merged document. Throws ConfigError.
CliConfig parse_config_document(const nlohmann::json& doc);

// Reads `path` (defaults only when empty), merges overrides and validates.
// Throws ConfigError.
CliConfig load_cli_config(const std::string& path, const std::vector<std::string>& overrides);

// Entry point for the prsim tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prsim
