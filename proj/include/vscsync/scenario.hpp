#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "vscsync/simulation.hpp"

namespace vscsync {

/// Names accepted by preset(): nominal, voltage_drop, frequency_drop,
/// scr_trip, baseline_comparison.
std::vector<std::string> preset_names();

/// Throws ConfigError for unknown names.
ScenarioConfig preset(const std::string& name);

/// Applies the keys present in `j` on top of `base`. A "preset" key selects
/// the base instead. Throws ConfigError on malformed input.
ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig base = {});

nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// A preset name or a path to a JSON scenario file.
ScenarioConfig load_scenario(const std::string& preset_or_path);

/// Builds the named preset, applies overrides, integrates.
RunOutput run_scenario(const std::string& name, const nlohmann::json& overrides = nlohmann::json::object());

}  // namespace vscsync
