#include "gait/nn.hpp"

#include <cmath>
#include <string>

#include "gait/errors.hpp"
#include "gait/rng.hpp"

namespace gait {

namespace {

// out = a . w^T, a: B x k, w: m x k  ->  B x m
Mat matmul_nt(const Mat& a, const Mat& w) {
    Mat out(a.rows, w.rows);
    for (int b = 0; b < a.rows; ++b) {
        const double* ar = a.row(b);
        double* or_ = out.row(b);
        for (int m = 0; m < w.rows; ++m) {
            const double* wr = w.row(m);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ar[k] * wr[k];
            or_[m] = acc;
        }
    }
    return out;
}

// out = g^T . x, g: B x m, x: B x k  ->  m x k
Mat matmul_tn(const Mat& g, const Mat& x) {
    Mat out(g.cols, x.cols);
    for (int b = 0; b < g.rows; ++b) {
        const double* gr = g.row(b);
        const double* xr = x.row(b);
        for (int m = 0; m < g.cols; ++m) {
            const double gm = gr[m];
            if (gm == 0.0) continue;
            double* or_ = out.row(m);
            for (int k = 0; k < x.cols; ++k) or_[k] += gm * xr[k];
        }
    }
    return out;
}

// out = g . w, g: B x m, w: m x k  ->  B x k
Mat matmul_nn(const Mat& g, const Mat& w) {
    Mat out(g.rows, w.cols);
    for (int b = 0; b < g.rows; ++b) {
        const double* gr = g.row(b);
        double* or_ = out.row(b);
        for (int m = 0; m < g.cols; ++m) {
            const double gm = gr[m];
            if (gm == 0.0) continue;
            const double* wr = w.row(m);
            for (int k = 0; k < w.cols; ++k) or_[k] += gm * wr[k];
        }
    }
    return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Activation derivative from the activation value itself.
inline double act_deriv(double a, bool output_layer, OutputAct out_act) {
    if (!output_layer) return 1.0 - a * a;                       // tanh
    if (out_act == OutputAct::Sigmoid) return a * (1.0 - a);
    return 1.0;                                                  // identity
}

}  // namespace

Mat hconcat(const Mat& a, const Mat& b) {
    if (a.rows != b.rows) throw ShapeError("hconcat: row counts differ");
    Mat out(a.rows, a.cols + b.cols);
    for (int r = 0; r < a.rows; ++r) {
        double* dst = out.row(r);
        const double* ar = a.row(r);
        const double* br = b.row(r);
        for (int c = 0; c < a.cols; ++c) dst[c] = ar[c];
        for (int c = 0; c < b.cols; ++c) dst[a.cols + c] = br[c];
    }
    return out;
}

Mat slice_cols(const Mat& m, int first, int last) {
    if (first < 0 || last > m.cols || first >= last) throw ShapeError("slice_cols: bad range");
    Mat out(m.rows, last - first);
    for (int r = 0; r < m.rows; ++r) {
        const double* src = m.row(r) + first;
        double* dst = out.row(r);
        for (int c = 0; c < out.cols; ++c) dst[c] = src[c];
    }
    return out;
}

Mat gather_rows(const Mat& m, std::span<const int> idx) {
    Mat out(static_cast<int>(idx.size()), m.cols);
    for (int r = 0; r < out.rows; ++r) {
        const double* src = m.row(idx[r]);
        double* dst = out.row(r);
        for (int c = 0; c < m.cols; ++c) dst[c] = src[c];
    }
    return out;
}

ParamBlob ParamBlob::zeros_like(const ParamBlob& other) {
    ParamBlob z;
    z.w.reserve(other.w.size());
    z.b.reserve(other.b.size());
    for (const Mat& m : other.w) z.w.emplace_back(m.rows, m.cols);
    for (const auto& v : other.b) z.b.emplace_back(v.size(), 0.0);
    return z;
}

int ParamBlob::flat_size() const {
    std::size_t n = 0;
    for (const Mat& m : w) n += m.v.size();
    for (const auto& v : b) n += v.size();
    return static_cast<int>(n);
}

void ParamBlob::flatten_into(std::span<double> out) const {
    std::size_t k = 0;
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (double x : w[l].v) out[k++] = x;
        for (double x : b[l]) out[k++] = x;
    }
}

void ParamBlob::unflatten_from(std::span<const double> in) {
    std::size_t k = 0;
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (double& x : w[l].v) x = in[k++];
        for (double& x : b[l]) x = in[k++];
    }
}

bool ParamBlob::same_shape(const ParamBlob& other) const {
    if (w.size() != other.w.size() || b.size() != other.b.size()) return false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].rows != other.w[i].rows || w[i].cols != other.w[i].cols) return false;
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i].size() != other.b[i].size()) return false;
    }
    return true;
}

bool ParamBlob::all_finite() const {
    for (const Mat& m : w) {
        for (double x : m.v) {
            if (!std::isfinite(x)) return false;
        }
    }
    for (const auto& v : b) {
        for (double x : v) {
            if (!std::isfinite(x)) return false;
        }
    }
    return true;
}

Mlp init_params(const std::vector<int>& layer_dims, OutputAct out_act, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw ConfigError("init_params: need at least input and output dims");
    for (int d : layer_dims) {
        if (d <= 0) throw ConfigError("init_params: layer dims must be positive");
    }
    Mlp net;
    net.dims = layer_dims;
    net.out_act = out_act;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Mat w(fan_out, fan_in);
        for (double& x : w.v) x = rng.uniform(-limit, limit);
        net.p.w.push_back(std::move(w));
        net.p.b.emplace_back(fan_out, 0.0);
    }
    return net;
}

std::vector<double> forward(const Mlp& net, std::span<const double> input) {
    if (static_cast<int>(input.size()) != net.in_dim()) {
        throw ShapeError("forward: input length " + std::to_string(input.size()) +
                         " != " + std::to_string(net.in_dim()));
    }
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    const int layers = net.layer_count();
    for (int l = 0; l < layers; ++l) {
        const Mat& w = net.p.w[l];
        const auto& b = net.p.b[l];
        next.assign(w.rows, 0.0);
        for (int m = 0; m < w.rows; ++m) {
            const double* wr = w.row(m);
            double acc = b[m];
            for (int k = 0; k < w.cols; ++k) acc += wr[k] * cur[k];
            next[m] = acc;
        }
        const bool last = (l == layers - 1);
        for (double& z : next) {
            if (!last) z = std::tanh(z);
            else if (net.out_act == OutputAct::Sigmoid) z = sigmoid(z);
        }
        cur.swap(next);
    }
    return cur;
}

Mat forward_batch(const Mlp& net, const Mat& input, ForwardCache* cache) {
    if (input.cols != net.in_dim()) {
        throw ShapeError("forward_batch: input has " + std::to_string(input.cols) +
                         " columns, net expects " + std::to_string(net.in_dim()));
    }
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(input);
    }
    Mat cur = input;
    const int layers = net.layer_count();
    for (int l = 0; l < layers; ++l) {
        Mat z = matmul_nt(cur, net.p.w[l]);
        const auto& b = net.p.b[l];
        const bool last = (l == layers - 1);
        for (int r = 0; r < z.rows; ++r) {
            double* zr = z.row(r);
            for (int c = 0; c < z.cols; ++c) {
                double a = zr[c] + b[c];
                if (!last) a = std::tanh(a);
                else if (net.out_act == OutputAct::Sigmoid) a = sigmoid(a);
                zr[c] = a;
            }
        }
        if (cache) cache->acts.push_back(z);
        cur = std::move(z);
    }
    return cur;
}

GradBundle backward_batch(const Mlp& net, const ForwardCache& cache, const Mat& upstream) {
    const int layers = net.layer_count();
    if (static_cast<int>(cache.acts.size()) != layers + 1) {
        throw ShapeError("backward_batch: cache does not match net depth");
    }
    if (upstream.rows != cache.acts[0].rows || upstream.cols != net.out_dim()) {
        throw ShapeError("backward_batch: upstream shape mismatch");
    }

    GradBundle g;
    g.p = ParamBlob::zeros_like(net.p);

    // dL/dZ of the output layer.
    Mat dz = upstream;
    {
        const Mat& a = cache.acts[layers];
        for (int r = 0; r < dz.rows; ++r) {
            double* dr = dz.row(r);
            const double* ar = a.row(r);
            for (int c = 0; c < dz.cols; ++c) dr[c] *= act_deriv(ar[c], true, net.out_act);
        }
    }

    for (int l = layers - 1; l >= 0; --l) {
        g.p.w[l] = matmul_tn(dz, cache.acts[l]);
        auto& bg = g.p.b[l];
        for (int r = 0; r < dz.rows; ++r) {
            const double* dr = dz.row(r);
            for (int c = 0; c < dz.cols; ++c) bg[c] += dr[c];
        }
        Mat da = matmul_nn(dz, net.p.w[l]);
        if (l > 0) {
            const Mat& a = cache.acts[l];
            for (int r = 0; r < da.rows; ++r) {
                double* dr = da.row(r);
                const double* ar = a.row(r);
                for (int c = 0; c < da.cols; ++c) dr[c] *= 1.0 - ar[c] * ar[c];
            }
            dz = std::move(da);
        } else {
            g.input = std::move(da);
        }
    }
    return g;
}

Mat jvp_batch(const Mlp& net, const ForwardCache& cache, const ParamBlob& tangent) {
    const int layers = net.layer_count();
    if (static_cast<int>(cache.acts.size()) != layers + 1) {
        throw ShapeError("jvp_batch: cache does not match net depth");
    }
    if (!tangent.same_shape(net.p)) throw ShapeError("jvp_batch: tangent shape mismatch");

    const int batch = cache.acts[0].rows;
    Mat da(batch, net.in_dim());  // input tangent is zero
    for (int l = 0; l < layers; ++l) {
        Mat dz = matmul_nt(cache.acts[l], tangent.w[l]);
        if (l > 0) {
            Mat carry = matmul_nt(da, net.p.w[l]);
            for (std::size_t i = 0; i < dz.v.size(); ++i) dz.v[i] += carry.v[i];
        }
        const auto& db = tangent.b[l];
        const Mat& a = cache.acts[l + 1];
        const bool last = (l == layers - 1);
        for (int r = 0; r < dz.rows; ++r) {
            double* dr = dz.row(r);
            const double* ar = a.row(r);
            for (int c = 0; c < dz.cols; ++c) {
                dr[c] = (dr[c] + db[c]) * act_deriv(ar[c], last, net.out_act);
            }
        }
        da = std::move(dz);
    }
    return da;
}

AdamState make_adam(const Mlp& net, double beta1, double beta2, double epsilon_stab) {
    AdamState st;
    st.first_moment = ParamBlob::zeros_like(net.p);
    st.second_moment = ParamBlob::zeros_like(net.p);
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.epsilon_stab = epsilon_stab;
    return st;
}

namespace {

inline void adam_apply(double* theta, double* m, double* v, const double* g, std::size_t n,
                       double lr, double b1, double b2, double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

void adam_update(Mlp& net, const GradBundle& grads, AdamState& state, double lr) {
    if (!grads.p.same_shape(net.p)) throw ShapeError("adam_update: gradient shape mismatch");
    if (!grads.p.all_finite()) {
        throw NumericalError("adam_update: non-finite gradient, update rejected");
    }
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t l = 0; l < net.p.w.size(); ++l) {
        adam_apply(net.p.w[l].v.data(), state.first_moment.w[l].v.data(),
                   state.second_moment.w[l].v.data(), grads.p.w[l].v.data(), net.p.w[l].v.size(),
                   lr, state.beta1, state.beta2, state.epsilon_stab, bc1, bc2);
        adam_apply(net.p.b[l].data(), state.first_moment.b[l].data(),
                   state.second_moment.b[l].data(), grads.p.b[l].data(), net.p.b[l].size(), lr,
                   state.beta1, state.beta2, state.epsilon_stab, bc1, bc2);
    }
}

AdamVecState make_adam_vec(std::size_t n, double beta1, double beta2, double epsilon_stab) {
    AdamVecState st;
    st.first_moment.assign(n, 0.0);
    st.second_moment.assign(n, 0.0);
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.epsilon_stab = epsilon_stab;
    return st;
}

void adam_update_vec(std::span<double> params, std::span<const double> grads, AdamVecState& state,
                     double lr) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
        throw ShapeError("adam_update_vec: size mismatch");
    }
    for (double g : grads) {
        if (!std::isfinite(g)) {
            throw NumericalError("adam_update_vec: non-finite gradient, update rejected");
        }
    }
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    adam_apply(params.data(), state.first_moment.data(), state.second_moment.data(), grads.data(),
               params.size(), lr, state.beta1, state.beta2, state.epsilon_stab, bc1, bc2);
}

}  // namespace gait
