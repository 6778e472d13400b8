#include "gait/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gait/errors.hpp"

namespace gait {

PpoAgent make_ppo(const PpoConfig& cfg, std::uint64_t seed) {
    if (!(cfg.clip_ratio > 0.0)) throw ConfigError("ppo: clip_ratio must be > 0");
    if (cfg.epochs_per_batch < 1 || cfg.minibatch_size < 1 || cfg.episodes_per_batch < 1) {
        throw ConfigError("ppo: epochs/minibatch/episodes per batch must be >= 1");
    }
    std::vector<int> policy_dims{kObsDim};
    std::vector<int> value_dims{kObsDim};
    for (int h : cfg.hidden) {
        policy_dims.push_back(h);
        value_dims.push_back(h);
    }
    policy_dims.push_back(kActionDim);
    value_dims.push_back(1);

    PpoAgent ag;
    ag.cfg = cfg;
    ag.policy.mean = init_params(policy_dims, OutputAct::Sigmoid, derive_seed(seed, 1));
    ag.policy.log_std.assign(kActionDim, cfg.init_log_std);
    ag.value = init_params(value_dims, OutputAct::Identity, derive_seed(seed, 2));
    ag.policy_opt = make_adam(ag.policy.mean);
    ag.log_std_opt = make_adam_vec(kActionDim);
    ag.value_opt = make_adam(ag.value);
    return ag;
}

double clipped_surrogate_term(double ratio, double advantage, double clip_ratio) {
    const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    return std::min(ratio * advantage, clipped * advantage);
}

PpoLosses ppo_update(PpoAgent& agent, const RolloutBatch& batch, Rng& rng) {
    const int n = batch.obs.rows;
    if (n == 0) throw UsageError("ppo_update: empty batch");
    if (batch.actions.rows != n || static_cast<int>(batch.logp_old.size()) != n ||
        static_cast<int>(batch.advantages.size()) != n ||
        static_cast<int>(batch.returns.size()) != n) {
        throw ShapeError("ppo_update: batch field lengths differ");
    }

    const double clip = agent.cfg.clip_ratio;
    std::vector<double> inv_var(kActionDim);
    PpoLosses losses;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < agent.cfg.epochs_per_batch; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        double epoch_surrogate = 0.0;
        double epoch_value_loss = 0.0;
        int epoch_samples = 0;

        for (int start = 0; start < n; start += agent.cfg.minibatch_size) {
            const int stop = std::min(start + agent.cfg.minibatch_size, n);
            const int m = stop - start;
            const std::span<const int> idx(order.data() + start, static_cast<std::size_t>(m));

            const Mat mb_obs = gather_rows(batch.obs, idx);
            const Mat mb_act = gather_rows(batch.actions, idx);

            for (int i = 0; i < kActionDim; ++i) {
                inv_var[i] = std::exp(-2.0 * agent.policy.log_std[i]);
            }

            ForwardCache pc;
            const Mat mu = forward_batch(agent.policy.mean, mb_obs, &pc);

            // Per-sample ratio and the active min() branch of the objective.
            bool finite = true;
            double surrogate = 0.0;
            Mat mu_up(m, kActionDim);
            std::vector<double> log_std_grad(kActionDim, 0.0);
            for (int r = 0; r < m; ++r) {
                const int src = idx[r];
                const double adv = batch.advantages[src];
                double logp = -0.5 * kActionDim * std::log(2.0 * std::numbers::pi);
                for (int c = 0; c < kActionDim; ++c) {
                    const double diff = mb_act.at(r, c) - mu.at(r, c);
                    logp -= 0.5 * diff * diff * inv_var[c] + agent.policy.log_std[c];
                }
                const double ratio = std::exp(logp - batch.logp_old[src]);
                if (!std::isfinite(ratio)) {
                    finite = false;
                    break;
                }
                surrogate += clipped_surrogate_term(ratio, adv, clip);

                // Gradient flows only through the unclipped branch.
                const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
                const double coef =
                    (ratio * adv <= clipped * adv) ? ratio * adv : 0.0;
                for (int c = 0; c < kActionDim; ++c) {
                    const double diff = mb_act.at(r, c) - mu.at(r, c);
                    // maximize => minimize the negative; upstream carries 1/m
                    mu_up.at(r, c) = -coef * diff * inv_var[c] / m;
                    log_std_grad[c] += -coef * (diff * diff * inv_var[c] - 1.0) / m;
                }
            }
            if (!finite) {
                ++losses.skipped_minibatches;
                continue;
            }
            surrogate /= m;

            GradBundle pg = backward_batch(agent.policy.mean, pc, mu_up);
            adam_update(agent.policy.mean, pg, agent.policy_opt, agent.cfg.policy_lr);
            adam_update_vec(agent.policy.log_std, log_std_grad, agent.log_std_opt,
                            agent.cfg.policy_lr);
            for (double& ls : agent.policy.log_std) ls = std::clamp(ls, -5.0, 2.0);

            // Value regression toward the GAE returns.
            ForwardCache vc;
            const Mat v = forward_batch(agent.value, mb_obs, &vc);
            Mat v_up(m, 1);
            double v_loss = 0.0;
            for (int r = 0; r < m; ++r) {
                const double diff = v.at(r, 0) - batch.returns[idx[r]];
                v_loss += diff * diff;
                v_up.at(r, 0) = 2.0 * diff / m;
            }
            v_loss /= m;
            GradBundle vg = backward_batch(agent.value, vc, v_up);
            adam_update(agent.value, vg, agent.value_opt, agent.cfg.value_lr);

            epoch_surrogate += surrogate * m;
            epoch_value_loss += v_loss * m;
            epoch_samples += m;
        }

        if (epoch_samples > 0) {
            losses.surrogate = epoch_surrogate / epoch_samples;
            losses.value_loss = epoch_value_loss / epoch_samples;
        }
    }
    return losses;
}

}  // namespace gait
