#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "modsafe/sim_engine.hpp"

namespace modsafe {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses `key = value` lines. '#' starts a comment, blank lines are
/// skipped, whitespace around key and value is trimmed, and a repeated key
/// keeps its last value. Throws ConfigError (with the line number) for a
/// non-comment line without '='.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Applies one `key=value` assignment (the --set form) on top of kv.
void apply_assignment(std::map<std::string, std::string>& kv,
                      const std::string& assignment);

/// Builds a SimConfig from defaults plus the given overrides. Every key must
/// be known (unknown keys raise ConfigError naming the key); `manifest.*`
/// entries are ignored so emitted manifests can be fed back in. Values that
/// fail to parse raise ConfigError naming the key. The result is not
/// validated here; call SimConfig::validate() before use.
SimConfig sim_config_from(const std::map<std::string, std::string>& kv);

/// Canonical text form listing every key; round-trips through
/// parse_key_values + sim_config_from.
std::string serialize_sim_config(const SimConfig& cfg);

}  // namespace modsafe
