#pragma once

#include <cstdint>
#include <vector>

#include "gait/rl_common.hpp"

namespace gait {

struct TrpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double kl_delta = 0.01;
    int cg_iters = 10;
    double cg_tol = 1e-8;
    double backtrack_coeff = 0.8;
    int backtrack_steps = 10;
    double damping = 0.1;
    int episodes_per_batch = 4;
    double value_lr = 1e-3;
    int value_epochs = 5;
    int value_minibatch = 256;
    double init_log_std = -1.0;
    std::vector<int> hidden = {64, 64};
};

struct TrpoAgent {
    TrpoConfig cfg;
    GaussianPolicy policy;
    Mlp value;
    AdamState value_opt;
};

TrpoAgent make_trpo(const TrpoConfig& cfg, std::uint64_t seed);

// (H + damping*I) v, where H is the Hessian of the mean KL between the
// current policy and itself over the given states. Uses a JVP/VJP pair, so H
// is never formed. v is laid out as [mean-net params..., log_std...].
std::vector<double> fisher_vector_product(const GaussianPolicy& policy, const Mat& states,
                                          std::span<const double> v, double damping);

// Mean KL(fixed old || policy) over states plus its exact gradient in the
// policy's parameters. Used by the line search and as the FVP test surface.
struct KlEval {
    double kl = 0.0;
    std::vector<double> grad;
};
KlEval kl_and_grad(const Mat& means_old, std::span<const double> log_std_old,
                   const GaussianPolicy& policy, const Mat& states);

struct TrpoUpdateResult {
    bool step_accepted = false;
    double kl_after = 0.0;
    double surrogate_improvement = 0.0;
};

// Natural-gradient step: CG on the Fisher system, scaled to the KL budget,
// then a backtracking line search that reverts on exhaustion.
TrpoUpdateResult trpo_update(TrpoAgent& agent, const RolloutBatch& batch, Rng& rng);

}  // namespace gait
