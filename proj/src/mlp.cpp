#include "sepspec/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sepspec {

bool Mlp::all_finite() const {
    for (const Matrix& w : weights) {
        if (!w.all_finite()) return false;
    }
    for (const auto& b : biases) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return ortho.all_finite();
}

Mlp make_mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output) {
    if (input == 0 || output == 0) throw std::invalid_argument("make_mlp: zero dimension");
    Mlp net;
    net.dims.push_back(input);
    for (std::size_t h : hidden) {
        if (h == 0) throw std::invalid_argument("make_mlp: zero hidden width");
        net.dims.push_back(h);
    }
    net.dims.push_back(output);
    for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
        net.weights.emplace_back(net.dims[l], net.dims[l + 1]);
        net.biases.emplace_back(net.dims[l + 1], 0.0);
    }
    net.ortho = Matrix::identity(output);
    return net;
}

void init_weights(Mlp& net, Rng& rng) {
    for (Matrix& w : net.weights) {
        const double bound = std::sqrt(6.0 / static_cast<double>(w.rows()));
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    }
    for (auto& b : net.biases) std::fill(b.begin(), b.end(), 0.0);
    net.ortho = Matrix::identity(net.output_dim());
}

namespace {

void linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b, Matrix& out) {
    matmul(x, w, out);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double* row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) row[c] += b[c];
    }
}

}  // namespace

void forward_raw(const Mlp& net, const Matrix& x, MlpWorkspace& ws, Matrix& pre) {
    if (x.cols() != net.input_dim()) throw std::invalid_argument("forward: input width mismatch");
    ws.acts.resize(net.layers() + 1);
    ws.acts[0] = x;
    for (std::size_t l = 0; l < net.layers(); ++l) {
        linear_forward(ws.acts[l], net.weights[l], net.biases[l], ws.acts[l + 1]);
        if (l + 1 < net.layers()) {
            Matrix& a = ws.acts[l + 1];
            double* p = a.data();
            for (std::size_t i = 0; i < a.size(); ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
        }
    }
    pre = ws.acts.back();
}

void forward(const Mlp& net, const Matrix& x, MlpWorkspace& ws, Matrix& y) {
    Matrix pre;
    forward_raw(net, x, ws, pre);
    matmul(pre, net.ortho, y);
}

void MlpGrads::reset(const Mlp& net) {
    weights.resize(net.layers());
    biases.resize(net.layers());
    for (std::size_t l = 0; l < net.layers(); ++l) {
        weights[l].resize(net.dims[l], net.dims[l + 1]);
        biases[l].assign(net.dims[l + 1], 0.0);
    }
}

void backward_raw(const Mlp& net, const MlpWorkspace& ws, const Matrix& dpre, MlpGrads& grads) {
    if (grads.weights.size() != net.layers()) {
        throw std::invalid_argument("backward_raw: grads not shaped; call reset first");
    }
    Matrix delta = dpre;
    for (std::size_t l = net.layers(); l-- > 0;) {
        matmul_tn_add(ws.acts[l], delta, grads.weights[l]);
        auto& gb = grads.biases[l];
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            const double* row = delta.row(r);
            for (std::size_t c = 0; c < delta.cols(); ++c) gb[c] += row[c];
        }
        if (l == 0) break;
        Matrix prev;
        matmul_nt(delta, net.weights[l], prev);
        // ReLU mask: the stored activation is positive iff the unit fired.
        const Matrix& act = ws.acts[l];
        for (std::size_t i = 0; i < prev.size(); ++i) {
            if (act.data()[i] <= 0.0) prev.data()[i] = 0.0;
        }
        delta = std::move(prev);
    }
}

void backward(const Mlp& net, const MlpWorkspace& ws, const Matrix& dy, MlpGrads& grads) {
    grads.reset(net);
    // Through the fixed ortho layer first.
    Matrix delta;
    matmul_nt(dy, net.ortho, delta);
    backward_raw(net, ws, delta, grads);
}

void Adam::reset(const Mlp& net) {
    mw.clear();
    vw.clear();
    mb.clear();
    vb.clear();
    for (const Matrix& w : net.weights) {
        mw.emplace_back(w.rows(), w.cols());
        vw.emplace_back(w.rows(), w.cols());
    }
    for (const auto& b : net.biases) {
        mb.emplace_back(b.size(), 0.0);
        vb.emplace_back(b.size(), 0.0);
    }
    t = 0;
}

void Adam::step(Mlp& net, const MlpGrads& grads, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        double* w = net.weights[l].data();
        const double* g = grads.weights[l].data();
        double* m = mw[l].data();
        double* v = vw[l].data();
        const std::size_t sz = net.weights[l].size();
        for (std::size_t i = 0; i < sz; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
        auto& b = net.biases[l];
        const auto& gb = grads.biases[l];
        auto& mbi = mb[l];
        auto& vbi = vb[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
            mbi[i] = beta1 * mbi[i] + (1.0 - beta1) * gb[i];
            vbi[i] = beta2 * vbi[i] + (1.0 - beta2) * gb[i] * gb[i];
            b[i] -= lr * (mbi[i] / c1) / (std::sqrt(vbi[i] / c2) + eps);
        }
    }
}

}  // namespace sepspec
