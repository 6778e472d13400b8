#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gait/dagger.hpp"
#include "gait/rl_common.hpp"

namespace gait {

inline constexpr const char* kBenchmarkHeader =
    "algorithm,seed,max_reward,mean_reward_full,mean_reward_final10pct,env_steps,wall_seconds";
inline constexpr const char* kDaggerHeader =
    "variant,seed,iteration,dataset_size,learner_mean,learner_max,expert_mean,env_steps,converged";
inline constexpr const char* kCurveHeader = "episode,return,running_mean_100";

struct BenchmarkRow {
    std::string algorithm;  // DDPG | TRPO | PPO
    std::uint64_t seed = 0;
    double max_reward = 0.0;
    double mean_reward_full = 0.0;
    double mean_reward_final10pct = 0.0;
    long long env_steps = 0;
    double wall_seconds = 0.0;
    std::string error;  // non-empty marks a failed run
};

struct DaggerRow {
    std::string variant;
    std::uint64_t seed = 0;
    IterationReport report;
    std::string error;
};

std::string benchmark_csv_text(const std::vector<BenchmarkRow>& rows);
std::string dagger_csv_text(const std::vector<DaggerRow>& rows);

// Per-episode learning curve with a trailing-100-episode running mean.
std::string curve_csv_text(const TrainReport& report);

void write_text_file(const std::string& path, const std::string& text);

// Strips the trailing wall_seconds column from every row; lets tests compare
// CSV outputs without the one machine-dependent column.
std::string strip_wall_seconds(const std::string& csv);

}  // namespace gait
