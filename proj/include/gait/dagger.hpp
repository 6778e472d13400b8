#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gait/rl_common.hpp"

namespace gait {

// Deterministic MLP policy: Observation -> excitations in (0,1).
struct Policy {
    Mlp net;

    MuscleAction act(const Observation& obs) const {
        return MuscleAction::from_span(forward(net, obs.as_array()));
    }
};

enum class DaggerVariant { Vanilla, RewardGated, ReturnGated, EpsilonGreedy };

std::string variant_name(DaggerVariant v);
DaggerVariant variant_from_name(const std::string& name);  // ConfigError on unknown

struct DaggerConfig {
    DaggerVariant variant = DaggerVariant::Vanilla;
    int iterations = 5;
    int trajectories_per_iteration = 5;
    int regression_epochs = 200;
    double regression_lr = 1e-3;
    int regression_minibatch = 256;
    double epsilon = 0.1;          // EpsilonGreedy only
    int rollout_horizon = 0;       // ReturnGated only; <= 0 means to episode end
    double convergence_fraction = 0.9;
    int eval_episodes = 20;
};

void validate(const DaggerConfig& cfg);  // throws ConfigError

// Append-only state -> label store; per-iteration boundaries retained.
struct AggregatedDataset {
    std::vector<std::array<double, kObsDim>> observations;
    std::vector<std::array<double, kActionDim>> labels;
    std::vector<int> iteration_ends;  // cumulative sizes after each iteration

    int size() const { return static_cast<int>(observations.size()); }
    void append(const Observation& obs, const MuscleAction& label);
    void mark_iteration() { iteration_ends.push_back(size()); }
};

struct IterationReport {
    int iteration = 0;
    int dataset_size = 0;
    double learner_mean = 0.0;
    double learner_max = 0.0;
    double expert_mean = 0.0;
    long long env_steps = 0;  // cumulative, counterfactual branches included
    bool converged = false;

    // Diagnostics beyond the CSV schema.
    double initial_regression_loss = 0.0;
    double final_regression_loss = 0.0;
};

struct EvalResult {
    double mean_return = 0.0;
    double max_return = 0.0;
};

// Deterministic rollout evaluation; episode seeds derived from seed.
EvalResult evaluate(const PolicyFn& policy, Environment& env, int episodes, std::uint64_t seed);

// Plain DAgger label: the expert's deterministic action at obs.
MuscleAction label_vanilla(const Policy& expert, const Observation& obs);

struct GateOutcome {
    MuscleAction label;
    bool expert_won = false;
};

// One-step counterfactual gate: both candidate actions are stepped from the
// same snapshot; the higher one-step reward keeps its action as the label,
// ties going to the expert. The env is restored to snap before returning.
GateOutcome label_reward_gated(Environment& env, const EnvSnapshot& snap,
                               const MuscleAction& a_expert, const MuscleAction& a_target);

// Multi-step counterfactual gate: each branch plays its candidate action and
// then follows its own policy for up to `horizon` steps (<= 0: to episode
// end), comparing undiscounted reward sums. Env restored to snap afterwards.
GateOutcome label_return_gated(Environment& env, const EnvSnapshot& snap,
                               const MuscleAction& a_expert, const MuscleAction& a_target,
                               const Policy& expert, const Policy& target, int horizon);

struct EpsilonChoice {
    MuscleAction executed;
    bool took_expert = false;
};

// Expert action with probability epsilon, target action otherwise.
// Consumes exactly one rng draw.
EpsilonChoice select_action_epsilon(const MuscleAction& a_expert, const MuscleAction& a_target,
                                    double epsilon, Rng& rng);

// One DAgger iteration: rollout under the learner (epsilon-mixed for the
// EpsilonGreedy variant), label every visited state per the variant, retrain
// the learner on the full aggregated dataset, then evaluate it.
IterationReport dagger_iteration(Environment& env, const Policy& expert, Policy& learner,
                                 AggregatedDataset& dataset, const DaggerConfig& cfg,
                                 double expert_mean, Rng& rng);

// Full run: fresh learner, cfg.iterations iterations with early stop on
// convergence. Logs a role-exchange notice when the learner overtakes the
// expert. Steps are accounted cumulatively across iterations.
std::vector<IterationReport> run_dagger(Environment& env, const Policy& expert,
                                        const DaggerConfig& cfg, std::uint64_t seed,
                                        std::ostream* log = nullptr);

// MSE regression of the learner onto the aggregated dataset (warm start).
// Returns (first epoch loss, last epoch loss).
std::pair<double, double> retrain_learner(Policy& learner, const AggregatedDataset& dataset,
                                          const DaggerConfig& cfg, Rng& rng);

}  // namespace gait
