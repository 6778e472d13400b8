#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gait {

// Dense row-major matrix. Rows index samples in batched calls.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
};

Mat hconcat(const Mat& a, const Mat& b);
Mat slice_cols(const Mat& m, int first, int last);        // columns [first, last)
Mat gather_rows(const Mat& m, std::span<const int> idx);

// One weight/bias entry per layer; doubles as a gradient or tangent container.
struct ParamBlob {
    std::vector<Mat> w;                   // w[i]: dims[i+1] x dims[i]
    std::vector<std::vector<double>> b;   // b[i]: dims[i+1]

    static ParamBlob zeros_like(const ParamBlob& other);
    int flat_size() const;
    void flatten_into(std::span<double> out) const;
    void unflatten_from(std::span<const double> in);
    bool same_shape(const ParamBlob& other) const;
    bool all_finite() const;
};

enum class OutputAct { Identity, Sigmoid };

// Fixed-topology multilayer perceptron: affine + tanh through the hidden
// layers, Identity or Sigmoid on the output layer.
struct Mlp {
    std::vector<int> dims;
    ParamBlob p;
    OutputAct out_act = OutputAct::Identity;

    int in_dim() const { return dims.front(); }
    int out_dim() const { return dims.back(); }
    int layer_count() const { return static_cast<int>(dims.size()) - 1; }
};

// Glorot-uniform weights, zero biases, deterministic per seed.
Mlp init_params(const std::vector<int>& layer_dims, OutputAct out_act, std::uint64_t seed);

std::vector<double> forward(const Mlp& net, std::span<const double> input);

// Post-activation values per layer; acts[0] is the input batch.
struct ForwardCache {
    std::vector<Mat> acts;
};

Mat forward_batch(const Mlp& net, const Mat& input, ForwardCache* cache = nullptr);

struct GradBundle {
    ParamBlob p;   // dL/dW, dL/db, shapes mirror the owning Mlp
    Mat input;     // dL/dX for the batch
    double loss = 0.0;
};

// Exact reverse-mode gradients of sum_b upstream[b] . output[b]. The upstream
// carries any loss scaling, so the result is already batch-reduced.
GradBundle backward_batch(const Mlp& net, const ForwardCache& cache, const Mat& upstream);

// Forward-mode directional derivative of the batched output along a parameter
// tangent, with the input held fixed. Requires the cache of a prior forward.
Mat jvp_batch(const Mlp& net, const ForwardCache& cache, const ParamBlob& tangent);

struct AdamState {
    ParamBlob first_moment;
    ParamBlob second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon_stab = 1e-8;
};

AdamState make_adam(const Mlp& net, double beta1 = 0.9, double beta2 = 0.999,
                    double epsilon_stab = 1e-8);

// Bias-corrected Adam step. Rejects non-finite gradients with NumericalError,
// leaving both params and state untouched.
void adam_update(Mlp& net, const GradBundle& grads, AdamState& state, double lr);

// Same update rule for a bare parameter vector (e.g. a policy's log_std).
struct AdamVecState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon_stab = 1e-8;
};

AdamVecState make_adam_vec(std::size_t n, double beta1 = 0.9, double beta2 = 0.999,
                           double epsilon_stab = 1e-8);
void adam_update_vec(std::span<double> params, std::span<const double> grads,
                     AdamVecState& state, double lr);

}  // namespace gait
