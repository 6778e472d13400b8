#include "gait/trpo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gait/errors.hpp"

namespace gait {

namespace {

std::vector<double> batched_logprob(const Mat& means, std::span<const double> log_std,
                                    const Mat& actions) {
    std::vector<double> lp(means.rows);
    std::vector<double> inv_var(log_std.size());
    double base = -0.5 * static_cast<double>(log_std.size()) * std::log(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < log_std.size(); ++i) {
        inv_var[i] = std::exp(-2.0 * log_std[i]);
        base -= log_std[i];
    }
    for (int r = 0; r < means.rows; ++r) {
        double acc = base;
        const double* mu = means.row(r);
        const double* a = actions.row(r);
        for (int c = 0; c < means.cols; ++c) {
            const double diff = a[c] - mu[c];
            acc -= 0.5 * diff * diff * inv_var[c];
        }
        lp[r] = acc;
    }
    return lp;
}

// mean(exp(logp - logp_old) * A) over the batch.
double surrogate_value(const Mat& means, std::span<const double> log_std,
                       const RolloutBatch& batch) {
    const std::vector<double> lp = batched_logprob(means, log_std, batch.actions);
    double s = 0.0;
    for (int r = 0; r < means.rows; ++r) {
        s += std::exp(lp[r] - batch.logp_old[r]) * batch.advantages[r];
    }
    return s / means.rows;
}

}  // namespace

// Minibatch Adam regression of the value net toward the GAE returns.
static void fit_value_net(TrpoAgent& agent, const RolloutBatch& batch, Rng& rng) {
    const int n = batch.obs.rows;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < agent.cfg.value_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (int start = 0; start < n; start += agent.cfg.value_minibatch) {
            const int stop = std::min(start + agent.cfg.value_minibatch, n);
            const int m = stop - start;
            const std::span<const int> idx(order.data() + start, static_cast<std::size_t>(m));
            const Mat mb_obs = gather_rows(batch.obs, idx);
            ForwardCache vc;
            const Mat v = forward_batch(agent.value, mb_obs, &vc);
            Mat v_up(m, 1);
            for (int r = 0; r < m; ++r) {
                v_up.at(r, 0) = 2.0 * (v.at(r, 0) - batch.returns[idx[r]]) / m;
            }
            const GradBundle vg = backward_batch(agent.value, vc, v_up);
            adam_update(agent.value, vg, agent.value_opt, agent.cfg.value_lr);
        }
    }
}

TrpoAgent make_trpo(const TrpoConfig& cfg, std::uint64_t seed) {
    if (!(cfg.kl_delta > 0.0)) throw ConfigError("trpo: kl_delta must be > 0");
    if (cfg.cg_iters < 1) throw ConfigError("trpo: cg_iters must be >= 1");
    if (!(cfg.backtrack_coeff > 0.0 && cfg.backtrack_coeff < 1.0)) {
        throw ConfigError("trpo: backtrack_coeff must lie in (0, 1)");
    }
    std::vector<int> policy_dims{kObsDim};
    std::vector<int> value_dims{kObsDim};
    for (int h : cfg.hidden) {
        policy_dims.push_back(h);
        value_dims.push_back(h);
    }
    policy_dims.push_back(kActionDim);
    value_dims.push_back(1);

    TrpoAgent ag;
    ag.cfg = cfg;
    ag.policy.mean = init_params(policy_dims, OutputAct::Sigmoid, derive_seed(seed, 1));
    ag.policy.log_std.assign(kActionDim, cfg.init_log_std);
    ag.value = init_params(value_dims, OutputAct::Identity, derive_seed(seed, 2));
    ag.value_opt = make_adam(ag.value);
    return ag;
}

std::vector<double> fisher_vector_product(const GaussianPolicy& policy, const Mat& states,
                                          std::span<const double> v, double damping) {
    const int net_size = policy.mean.p.flat_size();
    const int dim = policy.mean.out_dim();
    if (v.size() != static_cast<std::size_t>(net_size + dim)) {
        throw ShapeError("fisher_vector_product: v length does not match the policy");
    }

    ParamBlob tangent = ParamBlob::zeros_like(policy.mean.p);
    tangent.unflatten_from(v.subspan(0, net_size));

    ForwardCache cache;
    forward_batch(policy.mean, states, &cache);
    Mat dmu = jvp_batch(policy.mean, cache, tangent);  // J_mu v per state

    // Gauss-Newton form of the KL Hessian: J^T diag(1/sigma^2) J / B for the
    // mean head; the log_std block is exactly 2*I.
    const int batch = states.rows;
    for (int c = 0; c < dim; ++c) {
        const double inv_var = std::exp(-2.0 * policy.log_std[c]);
        for (int r = 0; r < batch; ++r) dmu.at(r, c) *= inv_var / batch;
    }
    const GradBundle pullback = backward_batch(policy.mean, cache, dmu);

    std::vector<double> out(net_size + dim);
    pullback.p.flatten_into({out.data(), static_cast<std::size_t>(net_size)});
    for (int c = 0; c < dim; ++c) out[net_size + c] = 2.0 * v[net_size + c];
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += damping * v[i];
        if (!std::isfinite(out[i])) {
            throw NumericalError("fisher_vector_product: non-finite output");
        }
    }
    return out;
}

KlEval kl_and_grad(const Mat& means_old, std::span<const double> log_std_old,
                   const GaussianPolicy& policy, const Mat& states) {
    if (means_old.rows != states.rows) throw ShapeError("kl_and_grad: batch size mismatch");
    const int batch = states.rows;
    const int dim = policy.mean.out_dim();
    const int net_size = policy.mean.p.flat_size();

    ForwardCache cache;
    const Mat mu_new = forward_batch(policy.mean, states, &cache);

    KlEval out;
    out.grad.assign(net_size + dim, 0.0);
    Mat up(batch, dim);
    std::vector<double> log_std_grad(dim, 0.0);
    for (int c = 0; c < dim; ++c) {
        const double var_old = std::exp(2.0 * log_std_old[c]);
        const double inv_var_new = std::exp(-2.0 * policy.log_std[c]);
        for (int r = 0; r < batch; ++r) {
            const double dm = mu_new.at(r, c) - means_old.at(r, c);
            out.kl += policy.log_std[c] - log_std_old[c] +
                      (var_old + dm * dm) * inv_var_new * 0.5 - 0.5;
            up.at(r, c) = dm * inv_var_new / batch;
            log_std_grad[c] += (1.0 - (var_old + dm * dm) * inv_var_new) / batch;
        }
    }
    out.kl /= batch;
    const GradBundle g = backward_batch(policy.mean, cache, up);
    g.p.flatten_into({out.grad.data(), static_cast<std::size_t>(net_size)});
    std::copy(log_std_grad.begin(), log_std_grad.end(), out.grad.begin() + net_size);
    return out;
}

TrpoUpdateResult trpo_update(TrpoAgent& agent, const RolloutBatch& batch, Rng& rng) {
    const int n = batch.obs.rows;
    if (n == 0) throw UsageError("trpo_update: empty batch");
    const int dim = kActionDim;
    const int net_size = agent.policy.mean.p.flat_size();

    // Old-policy statistics, fixed for the whole update.
    const Mat mu_old = forward_batch(agent.policy.mean, batch.obs);
    const std::vector<double> log_std_old = agent.policy.log_std;

    // Policy gradient of the surrogate at theta_old (ratio == 1 there).
    ForwardCache cache;
    forward_batch(agent.policy.mean, batch.obs, &cache);
    Mat up(n, dim);
    std::vector<double> log_std_grad(dim, 0.0);
    std::vector<double> inv_var(dim);
    for (int c = 0; c < dim; ++c) inv_var[c] = std::exp(-2.0 * log_std_old[c]);
    for (int r = 0; r < n; ++r) {
        const double adv = batch.advantages[r];
        for (int c = 0; c < dim; ++c) {
            const double diff = batch.actions.at(r, c) - mu_old.at(r, c);
            up.at(r, c) = adv * diff * inv_var[c] / n;
            log_std_grad[c] += adv * (diff * diff * inv_var[c] - 1.0) / n;
        }
    }
    const GradBundle gb = backward_batch(agent.policy.mean, cache, up);
    std::vector<double> g(net_size + dim);
    gb.p.flatten_into({g.data(), static_cast<std::size_t>(net_size)});
    std::copy(log_std_grad.begin(), log_std_grad.end(), g.begin() + net_size);

    double g_norm2 = 0.0;
    for (double x : g) g_norm2 += x * x;

    TrpoUpdateResult result;
    if (g_norm2 < 1e-20) {
        // Degenerate batch (e.g. all-zero advantages): nothing to do.
        result.step_accepted = true;
        result.kl_after = 0.0;
        fit_value_net(agent, batch, rng);
        return result;
    }

    const auto fvp = [&](const std::vector<double>& x) {
        return fisher_vector_product(agent.policy, batch.obs, x, agent.cfg.damping);
    };
    const std::vector<double> dir = conjugate_gradient(fvp, g, agent.cfg.cg_iters, agent.cfg.cg_tol);

    const std::vector<double> h_dir = fvp(dir);
    double dir_h_dir = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) dir_h_dir += dir[i] * h_dir[i];
    if (!(dir_h_dir > 0.0) || !std::isfinite(dir_h_dir)) {
        throw NumericalError("trpo_update: non-positive curvature along the CG direction");
    }
    const double scale = std::sqrt(2.0 * agent.cfg.kl_delta / dir_h_dir);

    const std::vector<double> theta_old = agent.policy.flatten();
    const double surrogate_old = surrogate_value(mu_old, log_std_old, batch);

    std::vector<double> theta_try(theta_old.size());
    double step_frac = 1.0;
    for (int k = 0; k < agent.cfg.backtrack_steps; ++k) {
        for (std::size_t i = 0; i < theta_old.size(); ++i) {
            theta_try[i] = theta_old[i] + step_frac * scale * dir[i];
        }
        agent.policy.unflatten(theta_try);

        const Mat mu_try = forward_batch(agent.policy.mean, batch.obs);
        const double kl = mean_gaussian_kl(mu_old, log_std_old, mu_try, agent.policy.log_std);
        const double surrogate_try = surrogate_value(mu_try, agent.policy.log_std, batch);
        const double improvement = surrogate_try - surrogate_old;

        if (std::isfinite(kl) && std::isfinite(improvement) && improvement > 0.0 &&
            kl <= agent.cfg.kl_delta) {
            result.step_accepted = true;
            result.kl_after = kl;
            result.surrogate_improvement = improvement;
            fit_value_net(agent, batch, rng);
            return result;
        }
        step_frac *= agent.cfg.backtrack_coeff;
    }

    // Line search exhausted: roll back bit-exactly.
    agent.policy.unflatten(theta_old);
    result.step_accepted = false;
    result.kl_after = 0.0;
    fit_value_net(agent, batch, rng);
    return result;
}

}  // namespace gait
