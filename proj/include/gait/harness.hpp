#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gait/config.hpp"
#include "gait/csv.hpp"

namespace gait {

// Trains ddpg/trpo/ppo for every seed in the config and writes benchmark.csv,
// per-run learning curves and checkpoints into out_dir. A failed run yields
// an ERROR-marked row; the others are unaffected.
std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& cfg, const std::string& out_dir,
                                        std::ostream* log = nullptr);

// Runs the requested DAgger variants for every seed against one expert and
// writes dagger.csv into out_dir.
std::vector<DaggerRow> run_dagger_suite(const ExperimentConfig& cfg, const Policy& expert,
                                        const std::vector<DaggerVariant>& variants,
                                        const std::string& out_dir, std::ostream* log = nullptr);

}  // namespace gait
