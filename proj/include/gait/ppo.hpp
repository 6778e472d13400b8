#pragma once

#include <cstdint>
#include <vector>

#include "gait/rl_common.hpp"

namespace gait {

struct PpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_ratio = 0.2;
    int epochs_per_batch = 10;
    int minibatch_size = 256;
    int episodes_per_batch = 4;
    double policy_lr = 3e-4;
    double value_lr = 1e-3;
    double init_log_std = -1.0;
    std::vector<int> hidden = {64, 64};
};

struct PpoAgent {
    PpoConfig cfg;
    GaussianPolicy policy;
    Mlp value;              // obs -> V, identity output
    AdamState policy_opt;
    AdamVecState log_std_opt;
    AdamState value_opt;
};

PpoAgent make_ppo(const PpoConfig& cfg, std::uint64_t seed);

struct PpoLosses {
    double surrogate = 0.0;   // mean clipped objective over the last epoch
    double value_loss = 0.0;
    int skipped_minibatches = 0;
};

// Clipped-surrogate maximization over shuffled minibatches; the value net
// regresses to the GAE returns in the same passes.
PpoLosses ppo_update(PpoAgent& agent, const RolloutBatch& batch, Rng& rng);

// Per-sample clipped objective; also the unit-test oracle surface.
double clipped_surrogate_term(double ratio, double advantage, double clip_ratio);

}  // namespace gait
