#include "gait/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "gait/errors.hpp"

namespace gait {

namespace {

Mat obs_batch(const std::vector<Transition>& batch, bool next) {
    Mat m(static_cast<int>(batch.size()), kObsDim);
    for (int i = 0; i < m.rows; ++i) {
        const auto a = next ? batch[i].next_obs.as_array() : batch[i].obs.as_array();
        std::copy(a.begin(), a.end(), m.row(i));
    }
    return m;
}

Mat action_batch(const std::vector<Transition>& batch) {
    Mat m(static_cast<int>(batch.size()), kActionDim);
    for (int i = 0; i < m.rows; ++i) {
        std::copy(batch[i].action.excitations.begin(), batch[i].action.excitations.end(),
                  m.row(i));
    }
    return m;
}

}  // namespace

DdpgAgent make_ddpg(const DdpgConfig& cfg, std::uint64_t seed) {
    if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) throw ConfigError("ddpg: tau must lie in (0, 1]");
    if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ConfigError("ddpg: gamma must lie in [0, 1]");
    if (cfg.batch_size < 1) throw ConfigError("ddpg: batch_size must be >= 1");

    std::vector<int> actor_dims{kObsDim};
    std::vector<int> critic_dims{kObsDim + kActionDim};
    for (int h : cfg.hidden) {
        actor_dims.push_back(h);
        critic_dims.push_back(h);
    }
    actor_dims.push_back(kActionDim);
    critic_dims.push_back(1);

    DdpgAgent ag;
    ag.cfg = cfg;
    ag.actor = init_params(actor_dims, OutputAct::Sigmoid, derive_seed(seed, 1));
    ag.critic = init_params(critic_dims, OutputAct::Identity, derive_seed(seed, 2));
    ag.target_actor = ag.actor;
    ag.target_critic = ag.critic;
    ag.actor_opt = make_adam(ag.actor);
    ag.critic_opt = make_adam(ag.critic);
    return ag;
}

MuscleAction ddpg_act(const DdpgAgent& agent, const Observation& obs, bool explore, Rng& rng) {
    const auto in = obs.as_array();
    std::vector<double> out = forward(agent.actor, in);
    if (explore) {
        for (double& x : out) x += rng.normal(0.0, agent.cfg.noise_sigma);
    }
    for (double& x : out) x = std::clamp(x, 0.0, 1.0);
    return MuscleAction::from_span(out);
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (!target.p.same_shape(online.p)) throw ShapeError("soft_update: shape mismatch");
    for (std::size_t l = 0; l < target.p.w.size(); ++l) {
        auto& tw = target.p.w[l].v;
        const auto& ow = online.p.w[l].v;
        for (std::size_t i = 0; i < tw.size(); ++i) tw[i] = tau * ow[i] + (1.0 - tau) * tw[i];
        auto& tb = target.p.b[l];
        const auto& ob = online.p.b[l];
        for (std::size_t i = 0; i < tb.size(); ++i) tb[i] = tau * ob[i] + (1.0 - tau) * tb[i];
    }
}

DdpgLosses ddpg_update(DdpgAgent& agent, const std::vector<Transition>& batch) {
    if (batch.empty()) throw UsageError("ddpg_update: empty batch");
    const int n = static_cast<int>(batch.size());

    const Mat obs = obs_batch(batch, false);
    const Mat next_obs = obs_batch(batch, true);
    const Mat actions = action_batch(batch);

    // Bootstrapped regression target from the target networks.
    const Mat next_actions = forward_batch(agent.target_actor, next_obs);
    const Mat next_q = forward_batch(agent.target_critic, hconcat(next_obs, next_actions));
    std::vector<double> target(n);
    for (int i = 0; i < n; ++i) {
        const double mask = batch[i].done ? 0.0 : 1.0;
        target[i] = batch[i].reward + agent.cfg.gamma * mask * next_q.at(i, 0);
    }

    // Critic: squared-error regression toward the target.
    ForwardCache critic_cache;
    const Mat q = forward_batch(agent.critic, hconcat(obs, actions), &critic_cache);
    double critic_loss = 0.0;
    Mat critic_up(n, 1);
    for (int i = 0; i < n; ++i) {
        const double diff = q.at(i, 0) - target[i];
        critic_loss += diff * diff;
        critic_up.at(i, 0) = 2.0 * diff / n;
    }
    critic_loss /= n;
    if (!std::isfinite(critic_loss)) throw NumericalError("ddpg_update: non-finite critic loss");
    GradBundle critic_grads = backward_batch(agent.critic, critic_cache, critic_up);
    adam_update(agent.critic, critic_grads, agent.critic_opt, agent.cfg.critic_lr);

    // Actor: ascend the (frozen) critic's value of the actor's own action.
    ForwardCache actor_cache;
    const Mat mu = forward_batch(agent.actor, obs, &actor_cache);
    ForwardCache q_cache;
    const Mat q_mu = forward_batch(agent.critic, hconcat(obs, mu), &q_cache);
    double actor_objective = 0.0;
    Mat ascend_up(n, 1);
    for (int i = 0; i < n; ++i) {
        actor_objective += q_mu.at(i, 0);
        ascend_up.at(i, 0) = -1.0 / n;  // minimize -mean(Q)
    }
    actor_objective /= n;
    if (!std::isfinite(actor_objective)) {
        throw NumericalError("ddpg_update: non-finite actor objective");
    }
    const GradBundle through_critic = backward_batch(agent.critic, q_cache, ascend_up);
    const Mat d_action = slice_cols(through_critic.input, kObsDim, kObsDim + kActionDim);
    GradBundle actor_grads = backward_batch(agent.actor, actor_cache, d_action);
    adam_update(agent.actor, actor_grads, agent.actor_opt, agent.cfg.actor_lr);

    soft_update(agent.target_actor, agent.actor, agent.cfg.tau);
    soft_update(agent.target_critic, agent.critic, agent.cfg.tau);

    return {critic_loss, actor_objective};
}

}  // namespace gait
