#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gait/dagger.hpp"
#include "gait/train.hpp"

namespace gait {

struct ExperimentConfig {
    EnvConfig env;
    AlgoConfigs algos;
    DaggerConfig dagger;
    Budget budget;
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir = "results";
};

// Strict INI-style parser: [section] headers, key = value pairs, '#' comments.
// Every key must be known in its section; unknown keys are hard errors so a
// typo can never silently fall back to a default.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);  // IoError if unreadable

}  // namespace gait
