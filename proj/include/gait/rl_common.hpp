#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gait/env.hpp"
#include "gait/nn.hpp"
#include "gait/rng.hpp"

namespace gait {

using PolicyFn = std::function<MuscleAction(const Observation&)>;

struct Transition {
    Observation obs;
    MuscleAction action;
    double reward = 0.0;
    Observation next_obs;
    bool done = false;  // true terminal only; time-limit cuts bootstrap through
};

// Fixed-capacity FIFO ring; sampling is uniform with replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity);

    void push(const Transition& t);
    std::vector<Transition> sample(int n, Rng& rng) const;  // UsageError if size < n

    int size() const { return size_; }
    int capacity() const { return capacity_; }
    const Transition& at(int i) const { return ring_[i]; }

private:
    int capacity_;
    int write_index_ = 0;
    int size_ = 0;
    std::vector<Transition> ring_;
};

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;  // advantages + values
};

// Recursive generalized advantage estimation over one concatenated segment.
// dones mask bootstrapping; last_value bootstraps a truncated tail.
GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                         double last_value, std::span<const std::uint8_t> dones, double gamma,
                         double lambda);

// In-place zero-mean/unit-variance scaling; left unchanged if variance < 1e-8.
void normalize_advantages(std::vector<double>& advantages);

// Diagonal-Gaussian log density.
double gaussian_logprob(std::span<const double> mean, std::span<const double> log_std,
                        std::span<const double> action);

// Exact KL(old || new) between diagonal Gaussians.
double gaussian_kl(std::span<const double> mean_old, std::span<const double> log_std_old,
                   std::span<const double> mean_new, std::span<const double> log_std_new);

// gaussian_kl averaged over a batch of per-state means (shared log_std).
double mean_gaussian_kl(const Mat& means_old, std::span<const double> log_std_old,
                        const Mat& means_new, std::span<const double> log_std_new);

// Plain conjugate gradient on an SPD operator. Returns once the residual
// 2-norm drops to tol or after iters iterations, whichever comes first.
std::vector<double> conjugate_gradient(
    const std::function<std::vector<double>(const std::vector<double>&)>& apply_A,
    const std::vector<double>& b, int iters, double tol);

// State-independent diagonal-Gaussian head over a deterministic mean network.
struct GaussianPolicy {
    Mlp mean;                      // Observation -> action mean, sigmoid output
    std::vector<double> log_std;   // one entry per action dim

    int flat_size() const { return mean.p.flat_size() + static_cast<int>(log_std.size()); }
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> flat);
};

// On-policy minibatch: one or more complete episodes, GAE already applied.
struct RolloutBatch {
    Mat obs;                        // N x kObsDim
    Mat actions;                    // N x kActionDim, raw (pre-clamp) samples
    std::vector<double> logp_old;
    std::vector<double> advantages; // normalized by the caller
    std::vector<double> returns;
};

struct TrainReport {
    std::vector<double> episode_returns;
    std::vector<int> episode_steps;
    long long env_steps = 0;
    long long updates = 0;
    double wall_seconds = 0.0;

    // TRPO bookkeeping for the trust-region contract.
    int trpo_attempted = 0;
    int trpo_accepted = 0;
    std::vector<double> trpo_accepted_kls;

    double max_return() const;
    double mean_return_full() const;
    double mean_return_final10pct() const;  // mean over the last ceil(n/10) episodes
};

}  // namespace gait
