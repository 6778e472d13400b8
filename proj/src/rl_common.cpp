#include "gait/rl_common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gait/errors.hpp"

namespace gait {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("replay buffer capacity must be >= 1");
    ring_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& t) {
    if (size_ < capacity_) {
        ring_.push_back(t);
        ++size_;
    } else {
        ring_[write_index_] = t;
    }
    write_index_ = (write_index_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(int n, Rng& rng) const {
    if (n > size_) {
        throw UsageError("replay buffer: asked for " + std::to_string(n) + " samples, holds " +
                         std::to_string(size_));
    }
    std::vector<Transition> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(ring_[rng.index(size_)]);
    return out;
}

GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                         double last_value, std::span<const std::uint8_t> dones, double gamma,
                         double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || dones.size() != n) {
        throw ShapeError("gae_advantages: rewards/values/dones lengths differ");
    }
    GaeResult res;
    res.advantages.assign(n, 0.0);
    res.returns.assign(n, 0.0);
    double carry = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double mask = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < n) ? values[i + 1] : last_value;
        const double delta = rewards[i] + gamma * mask * next_value - values[i];
        carry = delta + gamma * lambda * mask * carry;
        res.advantages[i] = carry;
        res.returns[i] = carry + values[i];
    }
    return res;
}

void normalize_advantages(std::vector<double>& advantages) {
    const std::size_t n = advantages.size();
    if (n == 0) return;
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    if (var < 1e-8) return;
    const double inv_std = 1.0 / std::sqrt(var);
    for (double& a : advantages) a = (a - mean) * inv_std;
}

double gaussian_logprob(std::span<const double> mean, std::span<const double> log_std,
                        std::span<const double> action) {
    const std::size_t d = mean.size();
    if (log_std.size() != d || action.size() != d) {
        throw ShapeError("gaussian_logprob: dimension mismatch");
    }
    double lp = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < d; ++i) {
        const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
        lp -= 0.5 * z * z + log_std[i];
    }
    return lp;
}

double gaussian_kl(std::span<const double> mean_old, std::span<const double> log_std_old,
                   std::span<const double> mean_new, std::span<const double> log_std_new) {
    const std::size_t d = mean_old.size();
    if (log_std_old.size() != d || mean_new.size() != d || log_std_new.size() != d) {
        throw ShapeError("gaussian_kl: dimension mismatch");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double var_old = std::exp(2.0 * log_std_old[i]);
        const double var_new = std::exp(2.0 * log_std_new[i]);
        const double dm = mean_new[i] - mean_old[i];
        kl += log_std_new[i] - log_std_old[i] + (var_old + dm * dm) / (2.0 * var_new) - 0.5;
    }
    return kl;
}

double mean_gaussian_kl(const Mat& means_old, std::span<const double> log_std_old,
                        const Mat& means_new, std::span<const double> log_std_new) {
    if (means_old.rows != means_new.rows || means_old.cols != means_new.cols) {
        throw ShapeError("mean_gaussian_kl: batch shape mismatch");
    }
    double total = 0.0;
    for (int r = 0; r < means_old.rows; ++r) {
        total += gaussian_kl({means_old.row(r), static_cast<std::size_t>(means_old.cols)},
                             log_std_old,
                             {means_new.row(r), static_cast<std::size_t>(means_new.cols)},
                             log_std_new);
    }
    return means_old.rows ? total / means_old.rows : 0.0;
}

std::vector<double> conjugate_gradient(
    const std::function<std::vector<double>(const std::vector<double>&)>& apply_A,
    const std::vector<double>& b, int iters, double tol) {
    const std::size_t n = b.size();
    std::vector<double> x(n, 0.0);
    std::vector<double> r = b;
    std::vector<double> p = b;
    double rs = 0.0;
    for (double v : r) rs += v * v;
    if (std::sqrt(rs) <= tol) return x;

    for (int it = 0; it < iters; ++it) {
        const std::vector<double> ap = apply_A(p);
        double p_ap = 0.0;
        for (std::size_t i = 0; i < n; ++i) p_ap += p[i] * ap[i];
        if (!std::isfinite(p_ap) || p_ap == 0.0) {
            throw NumericalError("conjugate_gradient: operator produced a degenerate curvature");
        }
        const double alpha = rs / p_ap;
        double rs_next = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rs_next += r[i] * r[i];
        }
        if (!std::isfinite(rs_next)) throw NumericalError("conjugate_gradient: non-finite residual");
        if (std::sqrt(rs_next) <= tol) return x;
        const double beta = rs_next / rs;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        rs = rs_next;
    }
    return x;
}

std::vector<double> GaussianPolicy::flatten() const {
    std::vector<double> flat(flat_size());
    mean.p.flatten_into({flat.data(), static_cast<std::size_t>(mean.p.flat_size())});
    std::copy(log_std.begin(), log_std.end(), flat.begin() + mean.p.flat_size());
    return flat;
}

void GaussianPolicy::unflatten(std::span<const double> flat) {
    const int net_size = mean.p.flat_size();
    if (flat.size() != static_cast<std::size_t>(flat_size())) {
        throw ShapeError("GaussianPolicy::unflatten: size mismatch");
    }
    mean.p.unflatten_from(flat.subspan(0, net_size));
    std::copy(flat.begin() + net_size, flat.end(), log_std.begin());
}

double TrainReport::max_return() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double r : episode_returns) m = std::max(m, r);
    return episode_returns.empty() ? 0.0 : m;
}

double TrainReport::mean_return_full() const {
    if (episode_returns.empty()) return 0.0;
    double s = 0.0;
    for (double r : episode_returns) s += r;
    return s / static_cast<double>(episode_returns.size());
}

double TrainReport::mean_return_final10pct() const {
    const std::size_t n = episode_returns.size();
    if (n == 0) return 0.0;
    const std::size_t window = std::max<std::size_t>(1, (n + 9) / 10);
    double s = 0.0;
    for (std::size_t i = n - window; i < n; ++i) s += episode_returns[i];
    return s / static_cast<double>(window);
}

}  // namespace gait
