#include "gait/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gait/errors.hpp"

namespace gait {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

MuscleAction random_action(Rng& rng) {
    MuscleAction a;
    for (double& e : a.excitations) e = rng.uniform01();
    return a;
}

TrainReport train_ddpg(DdpgAgent& agent, Environment& env, const Budget& budget,
                       std::uint64_t seed) {
    TrainReport report;
    const auto start = Clock::now();
    ReplayBuffer buffer(agent.cfg.replay_capacity);
    Rng explore_rng(derive_seed(seed, 11));
    Rng sample_rng(derive_seed(seed, 12));
    long long total_steps = 0;

    for (int ep = 0; ep < budget.episodes; ++ep) {
        Observation obs = env.reset(derive_seed(seed, 1000 + ep));
        double ep_return = 0.0;
        int ep_steps = 0;
        for (int t = 0; t < budget.steps_per_episode; ++t) {
            MuscleAction action = total_steps < agent.cfg.warmup_steps
                                      ? random_action(explore_rng)
                                      : ddpg_act(agent, obs, true, explore_rng);
            StepResult sr;
            try {
                sr = env.step(action);
            } catch (const std::exception& e) {
                throw UsageError("ddpg training: episode " + std::to_string(ep) + " step " +
                                 std::to_string(t) + ": " + e.what());
            }
            // A timeout is not a true terminal; only falls cut the bootstrap.
            buffer.push({obs, action, sr.reward, sr.obs, sr.fall});
            obs = sr.obs;
            ep_return += sr.reward;
            ++ep_steps;
            ++total_steps;

            if (total_steps >= agent.cfg.warmup_steps && buffer.size() >= agent.cfg.batch_size &&
                total_steps % agent.cfg.update_every == 0) {
                ddpg_update(agent, buffer.sample(agent.cfg.batch_size, sample_rng));
                ++report.updates;
            }
            if (sr.done) break;
        }
        report.episode_returns.push_back(ep_return);
        report.episode_steps.push_back(ep_steps);
        report.env_steps += ep_steps;
    }
    report.wall_seconds = elapsed_seconds(start);
    return report;
}

// Collected by both on-policy algorithms: complete episodes with per-episode
// GAE, concatenated and advantage-normalized.
RolloutBatch collect_rollout(const GaussianPolicy& policy, const Mlp& value, Environment& env,
                             int episodes, int steps_per_episode, double gamma, double lambda,
                             std::uint64_t seed, int episode_base, TrainReport& report) {
    std::vector<std::array<double, kObsDim>> all_obs;
    std::vector<std::array<double, kActionDim>> all_actions;
    std::vector<double> all_logp, all_adv, all_ret;
    Rng action_rng(derive_seed(seed, 21 + static_cast<std::uint64_t>(episode_base)));

    for (int ep = 0; ep < episodes; ++ep) {
        std::vector<std::array<double, kObsDim>> obs_seq;
        std::vector<std::array<double, kActionDim>> act_seq;
        std::vector<double> rewards, values, logps;
        std::vector<std::uint8_t> dones;

        Observation obs = env.reset(derive_seed(seed, 2000 + episode_base + ep));
        bool fell = false;
        for (int t = 0; t < steps_per_episode; ++t) {
            const auto obs_arr = obs.as_array();
            const std::vector<double> mu = forward(policy.mean, obs_arr);
            std::array<double, kActionDim> raw{};
            for (int i = 0; i < kActionDim; ++i) {
                raw[i] = mu[i] + std::exp(policy.log_std[i]) * action_rng.normal();
            }
            const double logp = gaussian_logprob(mu, policy.log_std, raw);
            const double v = forward(value, obs_arr)[0];

            StepResult sr = env.step(MuscleAction{raw});
            obs_seq.push_back(obs_arr);
            act_seq.push_back(raw);
            rewards.push_back(sr.reward);
            values.push_back(v);
            logps.push_back(logp);
            dones.push_back(sr.fall ? 1 : 0);
            obs = sr.obs;
            if (sr.done) {
                fell = sr.fall;
                break;
            }
        }

        const double last_value = fell ? 0.0 : forward(value, obs.as_array())[0];
        const GaeResult gae = gae_advantages(rewards, values, last_value, dones, gamma, lambda);

        double ep_return = 0.0;
        for (double r : rewards) ep_return += r;
        report.episode_returns.push_back(ep_return);
        report.episode_steps.push_back(static_cast<int>(rewards.size()));
        report.env_steps += static_cast<long long>(rewards.size());

        all_obs.insert(all_obs.end(), obs_seq.begin(), obs_seq.end());
        all_actions.insert(all_actions.end(), act_seq.begin(), act_seq.end());
        all_logp.insert(all_logp.end(), logps.begin(), logps.end());
        all_adv.insert(all_adv.end(), gae.advantages.begin(), gae.advantages.end());
        all_ret.insert(all_ret.end(), gae.returns.begin(), gae.returns.end());
    }

    RolloutBatch batch;
    const int n = static_cast<int>(all_obs.size());
    batch.obs = Mat(n, kObsDim);
    batch.actions = Mat(n, kActionDim);
    for (int r = 0; r < n; ++r) {
        std::copy(all_obs[r].begin(), all_obs[r].end(), batch.obs.row(r));
        std::copy(all_actions[r].begin(), all_actions[r].end(), batch.actions.row(r));
    }
    batch.logp_old = std::move(all_logp);
    batch.advantages = std::move(all_adv);
    batch.returns = std::move(all_ret);
    normalize_advantages(batch.advantages);
    return batch;
}

TrainReport train_ppo(PpoAgent& agent, Environment& env, const Budget& budget,
                      std::uint64_t seed) {
    TrainReport report;
    const auto start = Clock::now();
    Rng update_rng(derive_seed(seed, 31));
    int episodes_done = 0;
    while (episodes_done < budget.episodes) {
        const int group = std::min(agent.cfg.episodes_per_batch, budget.episodes - episodes_done);
        RolloutBatch batch =
            collect_rollout(agent.policy, agent.value, env, group, budget.steps_per_episode,
                            agent.cfg.gamma, agent.cfg.gae_lambda, seed, episodes_done, report);
        ppo_update(agent, batch, update_rng);
        ++report.updates;
        episodes_done += group;
    }
    report.wall_seconds = elapsed_seconds(start);
    return report;
}

TrainReport train_trpo(TrpoAgent& agent, Environment& env, const Budget& budget,
                       std::uint64_t seed) {
    TrainReport report;
    const auto start = Clock::now();
    Rng update_rng(derive_seed(seed, 41));
    int episodes_done = 0;
    while (episodes_done < budget.episodes) {
        const int group = std::min(agent.cfg.episodes_per_batch, budget.episodes - episodes_done);
        RolloutBatch batch =
            collect_rollout(agent.policy, agent.value, env, group, budget.steps_per_episode,
                            agent.cfg.gamma, agent.cfg.gae_lambda, seed, episodes_done, report);
        const TrpoUpdateResult res = trpo_update(agent, batch, update_rng);
        ++report.updates;
        ++report.trpo_attempted;
        if (res.step_accepted) {
            ++report.trpo_accepted;
            report.trpo_accepted_kls.push_back(res.kl_after);
        }
        episodes_done += group;
    }
    report.wall_seconds = elapsed_seconds(start);
    return report;
}

}  // namespace

const Mlp& TrainedAgent::policy_net() const {
    if (const auto* d = std::get_if<DdpgAgent>(&agent)) return d->actor;
    if (const auto* p = std::get_if<PpoAgent>(&agent)) return p->policy.mean;
    return std::get<TrpoAgent>(agent).policy.mean;
}

Mlp& TrainedAgent::policy_net() {
    return const_cast<Mlp&>(static_cast<const TrainedAgent*>(this)->policy_net());
}

TrainOutcome train(const std::string& algorithm_id, Environment& env, const AlgoConfigs& configs,
                   const Budget& budget, std::uint64_t seed) {
    if (budget.episodes < 0 || budget.steps_per_episode < 1) {
        throw ConfigError("train: budget must have episodes >= 0 and steps_per_episode >= 1");
    }
    TrainOutcome out;
    out.agent.algorithm = algorithm_id;
    if (algorithm_id == "ddpg") {
        DdpgAgent agent = make_ddpg(configs.ddpg, seed);
        out.report = train_ddpg(agent, env, budget, seed);
        out.agent.agent = std::move(agent);
    } else if (algorithm_id == "ppo") {
        PpoAgent agent = make_ppo(configs.ppo, seed);
        out.report = train_ppo(agent, env, budget, seed);
        out.agent.agent = std::move(agent);
    } else if (algorithm_id == "trpo") {
        TrpoAgent agent = make_trpo(configs.trpo, seed);
        out.report = train_trpo(agent, env, budget, seed);
        out.agent.agent = std::move(agent);
    } else {
        throw ConfigError("train: unknown algorithm '" + algorithm_id +
                          "' (expected ddpg, ppo or trpo)");
    }
    return out;
}

}  // namespace gait
