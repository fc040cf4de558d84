#pragma once

#include "json.hpp"
#include "railyard/pipeline/experiment.hpp"

namespace railyard::pipeline {

// Normalized form: every key present, defaults filled in.
nlohmann::json config_to_json(const ExperimentConfig& config);

// Missing keys keep their defaults. Unknown keys, type mismatches and
// invalid values raise scenario::InputError naming the key path. The
// result is validated.
ExperimentConfig config_from_json(const nlohmann::json& doc);

}  // namespace railyard::pipeline
