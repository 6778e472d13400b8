#pragma once

#include <cstdint>
#include <vector>

#include "gait/rl_common.hpp"

namespace gait {

struct DdpgConfig {
    double gamma = 0.99;
    double tau = 0.005;
    double noise_sigma = 0.1;
    int batch_size = 128;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    int warmup_steps = 1000;   // uniform-random steps before updates begin
    int update_every = 1;      // gradient step every N environment steps
    int replay_capacity = 200000;
    std::vector<int> hidden = {64, 64};
};

struct DdpgAgent {
    DdpgConfig cfg;
    Mlp actor;          // obs -> excitations, sigmoid output
    Mlp critic;         // obs (+) action -> Q, identity output
    Mlp target_actor;
    Mlp target_critic;
    AdamState actor_opt;
    AdamState critic_opt;
};

DdpgAgent make_ddpg(const DdpgConfig& cfg, std::uint64_t seed);

// Deterministic actor output; with explore, Gaussian noise then clamp to [0,1].
MuscleAction ddpg_act(const DdpgAgent& agent, const Observation& obs, bool explore, Rng& rng);

// target <- tau*online + (1-tau)*target, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

struct DdpgLosses {
    double critic_loss = 0.0;
    double actor_objective = 0.0;  // mean Q of the actor's own actions
};

// One gradient step on critic and actor followed by target soft updates.
DdpgLosses ddpg_update(DdpgAgent& agent, const std::vector<Transition>& batch);

}  // namespace gait
