#pragma once

#include "pdsape/ape.hpp"
#include "pdsape/bootstrap.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdsape {

/// Every tunable of an estimation run. Precedence when assembling:
/// defaults < config file < environment < command-line flags.
struct Settings {
  PipelineConfig pipeline;
  BootstrapConfig bootstrap;
};

/// Dotted keys accepted by set_key, e.g. "penalty.c", "solver.tol".
const std::vector<std::string>& config_keys();

/// Parses `value` for `key`; throws ConfigError on unknown keys or bad values.
void set_key(Settings& s, const std::string& key, const std::string& value);

/// Nested ({"penalty": {"c": 1.1}}) or flat ({"penalty.c": 1.1}) objects.
void apply_json(Settings& s, const nlohmann::json& j);
void apply_file(Settings& s, const std::filesystem::path& path);

/// Environment name for a key: PDSAPE_ + upper-case key with '.' -> '_'.
std::string env_name(const std::string& key);
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
/// Applies every PDSAPE_* variable found through `lookup` (getenv by default).
void apply_env(Settings& s, const EnvLookup& lookup = {});

nlohmann::json to_json(const Settings& s);

}  // namespace pdsape
