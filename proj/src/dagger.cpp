#include "gait/dagger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "gait/errors.hpp"

namespace gait {

std::string variant_name(DaggerVariant v) {
    switch (v) {
        case DaggerVariant::Vanilla: return "vanilla";
        case DaggerVariant::RewardGated: return "reward_gated";
        case DaggerVariant::ReturnGated: return "return_gated";
        case DaggerVariant::EpsilonGreedy: return "epsilon_greedy";
    }
    return "vanilla";
}

DaggerVariant variant_from_name(const std::string& name) {
    if (name == "vanilla") return DaggerVariant::Vanilla;
    if (name == "reward_gated") return DaggerVariant::RewardGated;
    if (name == "return_gated") return DaggerVariant::ReturnGated;
    if (name == "epsilon_greedy") return DaggerVariant::EpsilonGreedy;
    throw ConfigError("unknown dagger variant '" + name +
                      "' (expected vanilla, reward_gated, return_gated or epsilon_greedy)");
}

void validate(const DaggerConfig& cfg) {
    if (cfg.iterations < 1) throw ConfigError("dagger: iterations must be >= 1");
    if (cfg.trajectories_per_iteration < 1) {
        throw ConfigError("dagger: trajectories_per_iteration must be >= 1");
    }
    if (cfg.regression_epochs < 1) throw ConfigError("dagger: regression_epochs must be >= 1");
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) {
        throw ConfigError("dagger: epsilon must lie in [0, 1]");
    }
    if (!(cfg.convergence_fraction > 0.0 && cfg.convergence_fraction <= 1.0)) {
        throw ConfigError("dagger: convergence_fraction must lie in (0, 1]");
    }
    if (cfg.eval_episodes < 1) throw ConfigError("dagger: eval_episodes must be >= 1");
}

void AggregatedDataset::append(const Observation& obs, const MuscleAction& label) {
    observations.push_back(obs.as_array());
    labels.push_back(label.excitations);
}

EvalResult evaluate(const PolicyFn& policy, Environment& env, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw ConfigError("evaluate: episodes must be >= 1");
    EvalResult res;
    res.max_return = -std::numeric_limits<double>::infinity();
    for (int ep = 0; ep < episodes; ++ep) {
        Observation obs = env.reset(derive_seed(seed, 3000 + ep));
        double ret = 0.0;
        while (!env.done()) {
            const StepResult sr = env.step(policy(obs));
            ret += sr.reward;
            obs = sr.obs;
        }
        res.mean_return += ret;
        res.max_return = std::max(res.max_return, ret);
    }
    res.mean_return /= episodes;
    return res;
}

MuscleAction label_vanilla(const Policy& expert, const Observation& obs) {
    return expert.act(obs);
}

GateOutcome label_reward_gated(Environment& env, const EnvSnapshot& snap,
                               const MuscleAction& a_expert, const MuscleAction& a_target) {
    env.restore(snap);
    const double reward_expert = env.step(a_expert).reward;
    env.restore(snap);
    const double reward_target = env.step(a_target).reward;
    env.restore(snap);
    if (reward_expert < reward_target) return {a_target, false};
    return {a_expert, true};
}

namespace {

// Undiscounted return of: candidate action, then `policy` until the episode
// ends or `horizon` total steps have been taken.
double branch_return(Environment& env, const EnvSnapshot& snap, const MuscleAction& first,
                     const Policy& policy, int horizon) {
    env.restore(snap);
    StepResult sr = env.step(first);
    double total = sr.reward;
    int taken = 1;
    while (!sr.done && (horizon <= 0 || taken < horizon)) {
        sr = env.step(policy.act(sr.obs));
        total += sr.reward;
        ++taken;
    }
    return total;
}

}  // namespace

GateOutcome label_return_gated(Environment& env, const EnvSnapshot& snap,
                               const MuscleAction& a_expert, const MuscleAction& a_target,
                               const Policy& expert, const Policy& target, int horizon) {
    const double return_expert = branch_return(env, snap, a_expert, expert, horizon);
    const double return_target = branch_return(env, snap, a_target, target, horizon);
    env.restore(snap);
    if (return_expert < return_target) return {a_target, false};
    return {a_expert, true};
}

EpsilonChoice select_action_epsilon(const MuscleAction& a_expert, const MuscleAction& a_target,
                                    double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ConfigError("select_action_epsilon: epsilon must lie in [0, 1]");
    }
    const bool take_expert = rng.uniform01() < epsilon;
    return {take_expert ? a_expert : a_target, take_expert};
}

std::pair<double, double> retrain_learner(Policy& learner, const AggregatedDataset& dataset,
                                          const DaggerConfig& cfg, Rng& rng) {
    const int n = dataset.size();
    if (n == 0) throw UsageError("retrain_learner: empty dataset");

    Mat X(n, kObsDim);
    Mat Y(n, kActionDim);
    for (int r = 0; r < n; ++r) {
        std::copy(dataset.observations[r].begin(), dataset.observations[r].end(), X.row(r));
        std::copy(dataset.labels[r].begin(), dataset.labels[r].end(), Y.row(r));
    }

    AdamState opt = make_adam(learner.net);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    double first_loss = 0.0;
    double last_loss = 0.0;
    for (int epoch = 0; epoch < cfg.regression_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += cfg.regression_minibatch) {
            const int stop = std::min(start + cfg.regression_minibatch, n);
            const int m = stop - start;
            const std::span<const int> idx(order.data() + start, static_cast<std::size_t>(m));
            const Mat mb_x = gather_rows(X, idx);
            const Mat mb_y = gather_rows(Y, idx);

            ForwardCache cache;
            const Mat pred = forward_batch(learner.net, mb_x, &cache);
            Mat up(m, kActionDim);
            double loss = 0.0;
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < kActionDim; ++c) {
                    const double diff = pred.at(r, c) - mb_y.at(r, c);
                    loss += diff * diff;
                    up.at(r, c) = 2.0 * diff / (m * kActionDim);
                }
            }
            loss /= m * kActionDim;
            const GradBundle g = backward_batch(learner.net, cache, up);
            adam_update(learner.net, g, opt, cfg.regression_lr);
            epoch_loss += loss * m;
        }
        epoch_loss /= n;
        if (epoch == 0) first_loss = epoch_loss;
        last_loss = epoch_loss;
    }
    return {first_loss, last_loss};
}

IterationReport dagger_iteration(Environment& env, const Policy& expert, Policy& learner,
                                 AggregatedDataset& dataset, const DaggerConfig& cfg,
                                 double expert_mean, Rng& rng) {
    validate(cfg);
    const long long steps_before = env.lifetime_steps();

    for (int traj = 0; traj < cfg.trajectories_per_iteration; ++traj) {
        Observation obs = env.reset(rng.raw());
        while (!env.done()) {
            const MuscleAction a_target = learner.act(obs);
            MuscleAction executed = a_target;
            MuscleAction label{};
            switch (cfg.variant) {
                case DaggerVariant::Vanilla:
                    label = label_vanilla(expert, obs);
                    break;
                case DaggerVariant::EpsilonGreedy: {
                    label = label_vanilla(expert, obs);
                    executed = select_action_epsilon(label, a_target, cfg.epsilon, rng).executed;
                    break;
                }
                case DaggerVariant::RewardGated: {
                    const EnvSnapshot snap = env.snapshot();
                    label = label_reward_gated(env, snap, expert.act(obs), a_target).label;
                    break;
                }
                case DaggerVariant::ReturnGated: {
                    const EnvSnapshot snap = env.snapshot();
                    label = label_return_gated(env, snap, expert.act(obs), a_target, expert,
                                               learner, cfg.rollout_horizon)
                                .label;
                    break;
                }
            }
            dataset.append(obs, label);
            obs = env.step(executed).obs;
        }
    }
    dataset.mark_iteration();

    IterationReport report;
    const auto [first_loss, last_loss] = retrain_learner(learner, dataset, cfg, rng);
    report.initial_regression_loss = first_loss;
    report.final_regression_loss = last_loss;
    report.dataset_size = dataset.size();
    report.env_steps = env.lifetime_steps() - steps_before;

    Environment eval_env(env.config());
    const Policy& learner_ref = learner;
    const EvalResult eval = evaluate([&learner_ref](const Observation& o) { return learner_ref.act(o); },
                                     eval_env, cfg.eval_episodes, rng.raw());
    report.learner_mean = eval.mean_return;
    report.learner_max = eval.max_return;
    report.expert_mean = expert_mean;
    report.converged = eval.mean_return >= cfg.convergence_fraction * expert_mean;
    return report;
}

std::vector<IterationReport> run_dagger(Environment& env, const Policy& expert,
                                        const DaggerConfig& cfg, std::uint64_t seed,
                                        std::ostream* log) {
    validate(cfg);
    Rng rng(derive_seed(seed, 51));

    Policy learner{init_params(expert.net.dims, OutputAct::Sigmoid, derive_seed(seed, 52))};

    Environment eval_env(env.config());
    const EvalResult expert_eval =
        evaluate([&expert](const Observation& o) { return expert.act(o); }, eval_env,
                 cfg.eval_episodes, derive_seed(seed, 53));

    std::vector<IterationReport> reports;
    AggregatedDataset dataset;
    long long cumulative_steps = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
        IterationReport rep =
            dagger_iteration(env, expert, learner, dataset, cfg, expert_eval.mean_return, rng);
        rep.iteration = it;
        cumulative_steps += rep.env_steps;
        rep.env_steps = cumulative_steps;
        reports.push_back(rep);
        if (log && rep.learner_mean > rep.expert_mean) {
            *log << "[dagger] learner mean " << rep.learner_mean << " exceeds expert mean "
                 << rep.expert_mean << " at iteration " << it
                 << "; roles could be exchanged\n";
        }
        if (rep.converged) break;
    }
    return reports;
}

}  // namespace gait
