#pragma once

#include <cstddef>
#include <vector>

#include "sepspec/matrix.hpp"
#include "sepspec/rng.hpp"

namespace sepspec {

// Fully connected ReLU network with a trailing linear map ("ortho layer")
// that is set directly by the training loop rather than by gradient descent.
struct Mlp {
    std::vector<std::size_t> dims;           // input, hidden..., output width
    std::vector<Matrix> weights;             // layer l: dims[l] x dims[l+1]
    std::vector<std::vector<double>> biases; // layer l: dims[l+1]
    Matrix ortho;                            // output x output

    std::size_t layers() const { return weights.size(); }
    std::size_t input_dim() const { return dims.front(); }
    std::size_t output_dim() const { return dims.back(); }
    bool all_finite() const;
};

Mlp make_mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output);

// He-style fan-in uniform init: U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero
// biases, identity ortho layer.
void init_weights(Mlp& net, Rng& rng);

// Per-layer activations kept alive between steps to avoid reallocation.
struct MlpWorkspace {
    std::vector<Matrix> acts;  // acts[0] = input, acts[l+1] = output of layer l
};

// Forward pass up to the last linear layer (before the ortho map).
void forward_raw(const Mlp& net, const Matrix& x, MlpWorkspace& ws, Matrix& pre);

// Full forward pass including the ortho layer.
void forward(const Mlp& net, const Matrix& x, MlpWorkspace& ws, Matrix& y);

struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    // Shapes the buffers like net and zeroes them.
    void reset(const Mlp& net);
};

// Backpropagates dLoss/dpre (the gradient at the pre-ortho outputs) through
// the linear stack, ACCUMULATING onto grads. grads must already be shaped by
// reset(). Requires the workspace of the forward pass that produced pre; lets
// one update combine gradient paths from several forward passes.
void backward_raw(const Mlp& net, const MlpWorkspace& ws, const Matrix& dpre, MlpGrads& grads);

// Backpropagates dLoss/dY through the ortho layer (held fixed) and the linear
// stack, filling grads for every tunable parameter. Requires the workspace of
// the forward pass that produced y.
void backward(const Mlp& net, const MlpWorkspace& ws, const Matrix& dy, MlpGrads& grads);

// Adam with the usual bias correction; step() consumes one gradient at the
// given learning rate.
struct Adam {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
    long t = 0;

    void reset(const Mlp& net);
    void step(Mlp& net, const MlpGrads& grads, double lr);
};

}  // namespace sepspec
