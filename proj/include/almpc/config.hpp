#pragma once

#include <string>

#include "almpc/sim.hpp"

namespace almpc {

/// Parses an experiment config from JSON text. Missing sections fall back to
/// the desk defaults; malformed values throw ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);

ExperimentConfig load_experiment_config(const std::string& path);

std::string experiment_config_to_json(const ExperimentConfig& cfg);

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace almpc
