#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "gait/ddpg.hpp"
#include "gait/ppo.hpp"
#include "gait/trpo.hpp"

namespace gait {

struct Budget {
    int episodes = 2000;
    int steps_per_episode = 1000;
};

struct AlgoConfigs {
    DdpgConfig ddpg;
    PpoConfig ppo;
    TrpoConfig trpo;
};

// A trained agent ready for evaluation, checkpointing or DAgger supervision.
struct TrainedAgent {
    std::string algorithm;  // "ddpg" | "ppo" | "trpo"
    std::variant<DdpgAgent, PpoAgent, TrpoAgent> agent;

    // The deterministic policy network (DDPG actor or the Gaussian mean).
    const Mlp& policy_net() const;
    Mlp& policy_net();
};

struct TrainOutcome {
    TrainedAgent agent;
    TrainReport report;
};

// Runs the selected algorithm to the budget. Pure function of
// (algorithm, env config, configs, budget, seed).
TrainOutcome train(const std::string& algorithm_id, Environment& env, const AlgoConfigs& configs,
                   const Budget& budget, std::uint64_t seed);

}  // namespace gait
