#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "mzzb/experiments.hpp"
#include "mzzb/models.hpp"

namespace mzzb {

/// Scenario read from a JSON config. The true signal defaults to the
/// assumed one; noise means default to zero.
struct Scenario {
  AssumedModel assumed;
  TrueModel truth;
  Prior prior;
  nlohmann::json bound;  // optional "bound" section
  nlohmann::json mc;     // optional "mc" section
  nlohmann::json pe;     // optional "pe" section
};

/// Parses JSON text, throwing ConfigError with the offending line for
/// syntax errors and the JSON pointer of the field for schema errors.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config_file(const std::string& path);

bool is_sweep_config(const nlohmann::json& j);
Scenario scenario_from_json(const nlohmann::json& j);
SweepConfig sweep_from_json(const nlohmann::json& j);

}  // namespace mzzb
