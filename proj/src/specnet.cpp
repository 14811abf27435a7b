#include "sepspec/specnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "json_io.hpp"
#include "sepspec/error.hpp"
#include "sepspec/linalg.hpp"
#include "sepspec/rng.hpp"

namespace sepspec {

namespace {

// Substream tags for the independent random streams of one training run.
enum : std::uint64_t {
    kStreamInit = 0,
    kStreamValSplit = 1,
    kStreamOrtho = 2,
    kStreamGrad = 3,
    kStreamSeparate = 4,
};

constexpr int kMaxOrthoRetries = 5;

// Any strict improvement resets the plateau counter; the margin only guards
// against float jitter at equal loss.
constexpr double kPlateauThreshold = 1e-9;

void gather_rows(const Matrix& src, const std::vector<std::uint32_t>& idx, std::size_t lo,
                 std::size_t count, Matrix& out) {
    out.resize(count, src.cols());
    for (std::size_t i = 0; i < count; ++i) {
        const double* r = src.row(idx[lo + i]);
        std::copy(r, r + src.cols(), out.row(i));
    }
}

Laplacian batch_laplacian(const Matrix& x, std::size_t knn_k, LaplacianVariant variant) {
    return laplacian(affinity(knn(x, knn_k)), variant);
}

}  // namespace

std::size_t TrainConfig::patience(std::size_t n) const {
    const double ratio = static_cast<double>(n) / static_cast<double>(batch_size);
    if (ratio <= 25.0) return 10;
    const double p = std::round(250.0 * static_cast<double>(batch_size) / static_cast<double>(n));
    return static_cast<std::size_t>(std::max(1.0, p));
}

void TrainConfig::validate() const {
    if (k == 0) throw std::invalid_argument("config: k must be positive");
    if (batch_size < k + 2) throw std::invalid_argument("config: batch_size must be at least k + 2");
    if (knn == 0) throw std::invalid_argument("config: knn must be positive");
    if (hidden.empty()) throw std::invalid_argument("config: at least one hidden layer");
    if (!(lr > 0.0) || !(min_lr > 0.0) || lr < min_lr) {
        throw std::invalid_argument("config: need lr >= min_lr > 0");
    }
    if (lr_divisor <= 1.0) throw std::invalid_argument("config: lr_divisor must exceed 1");
    if (val_frac < 0.0 || val_frac >= 1.0) throw std::invalid_argument("config: val_frac in [0, 1)");
    if (max_epochs == 0) throw std::invalid_argument("config: max_epochs must be positive");
}

double rq_loss(const Matrix& y, const Laplacian& lap) {
    Matrix ly;
    lap.apply(y, ly);
    const double m = static_cast<double>(y.rows());
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += y.data()[i] * ly.data()[i];
    return acc / (m * m);
}

void rq_loss_grad(const Matrix& y, const Laplacian& lap, Matrix& dy) {
    // d/dY tr(Y^T L Y) = (L + L^T) Y; the loss variants in use are symmetric
    // except random_walk, whose transpose is applied explicitly.
    Matrix ly;
    lap.apply(y, ly);
    const double m = static_cast<double>(y.rows());
    const double scale = 1.0 / (m * m);
    if (lap.variant == LaplacianVariant::random_walk) {
        // L_rw^T y = y - W D^-1 y.
        Matrix scaled = y;
        for (std::size_t i = 0; i < y.rows(); ++i) {
            const double d = lap.degrees[i];
            const double f = d > 0.0 ? 1.0 / d : 0.0;
            double* r = scaled.row(i);
            for (std::size_t c = 0; c < y.cols(); ++c) r[c] *= f;
        }
        Matrix ws(y.rows(), y.cols());
        for (std::size_t i = 0; i < y.rows(); ++i) {
            double* out = ws.row(i);
            for (std::size_t p = lap.affinity.row_ptr[i]; p < lap.affinity.row_ptr[i + 1]; ++p) {
                const double w = lap.affinity.weights[p];
                const double* xj = scaled.row(lap.affinity.col_idx[p]);
                for (std::size_t c = 0; c < y.cols(); ++c) out[c] += w * xj[c];
            }
        }
        dy.resize(y.rows(), y.cols());
        for (std::size_t r = 0; r < y.rows(); ++r) {
            const double diag = lap.degrees[r] > 0.0 ? 1.0 : 0.0;
            const double* yr = y.row(r);
            const double* lyr = ly.row(r);
            const double* wsr = ws.row(r);
            double* dr = dy.row(r);
            for (std::size_t c = 0; c < y.cols(); ++c) {
                dr[c] = scale * (lyr[c] + diag * yr[c] - wsr[c]);
            }
        }
    } else {
        dy.resize(y.rows(), y.cols());
        for (std::size_t i = 0; i < y.size(); ++i) dy.data()[i] = 2.0 * scale * ly.data()[i];
    }
}

double orthonorm_step(Mlp& net, const Matrix& batch, MlpWorkspace& ws) {
    const std::size_t m = batch.rows();
    const std::size_t p = net.output_dim();
    if (m < p) throw std::invalid_argument("orthonorm_step: batch smaller than output width");

    Matrix pre;
    forward_raw(net, batch, ws, pre);
    const QrResult f = qr(pre, /*want_q=*/false);
    // ortho = sqrt(m) R^-1 makes (1/m) (pre * ortho)^T (pre * ortho) = I.
    net.ortho = solve_upper(f.r, Matrix::identity(p));
    const double root_m = std::sqrt(static_cast<double>(m));
    for (std::size_t i = 0; i < net.ortho.size(); ++i) net.ortho.data()[i] *= root_m;

    Matrix y, gram;
    matmul(pre, net.ortho, y);
    matmul_tn(y, y, gram);
    double dev = 0.0;
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            dev = std::max(dev, std::fabs(gram(i, j) * inv_m - (i == j ? 1.0 : 0.0)));
        }
    }
    return dev;
}

double grad_step(Mlp& net, Adam& adam, const Matrix& batch, const Laplacian& lap, double lr,
                 MlpWorkspace& ws, MlpGrads& grads, const MlpWorkspace& ortho_ws) {
    if (ortho_ws.acts.empty()) throw std::invalid_argument("grad_step: ortho workspace is empty");
    const Matrix& pre_o = ortho_ws.acts.back();
    if (pre_o.cols() != net.output_dim()) {
        throw std::invalid_argument("grad_step: ortho workspace does not match the network");
    }

    Matrix y;
    forward(net, batch, ws, y);
    const double loss = rq_loss(y, lap);
    if (!std::isfinite(loss)) throw NumericError("grad_step: non-finite loss");
    Matrix dy;
    rq_loss_grad(y, lap, dy);

    grads.reset(net);
    // Path through this batch's outputs: d(pre) = dy * ortho^T.
    Matrix dpre;
    matmul_nt(dy, net.ortho, dpre);
    backward_raw(net, ws, dpre, grads);

    // Path through the ortho layer. With O = sqrt(m) R^-1 built from the
    // orthogonalization batch, O O^T = m (pre_o^T pre_o)^-1, so the loss is the
    // generalized Rayleigh quotient tr(S (pre_o^T pre_o)^-1) with S fixed by
    // this batch. Differentiating that inverse gives
    //   d(pre_o) = -(1/m) pre_o O (O^T G O^T)  with  G = pre^T dy,
    // which cancels the radial (scale) component of the first path exactly.
    const Matrix& pre = ws.acts.back();
    Matrix g_o;
    matmul_tn(pre, dy, g_o);
    Matrix t1;
    matmul_tn(net.ortho, g_o, t1);
    Matrix t2;
    matmul_nt(t1, net.ortho, t2);
    Matrix t3;
    matmul(net.ortho, t2, t3);
    Matrix dpre_o;
    matmul(pre_o, t3, dpre_o);
    const double neg_inv_m = -1.0 / static_cast<double>(pre_o.rows());
    for (std::size_t i = 0; i < dpre_o.size(); ++i) dpre_o.data()[i] *= neg_inv_m;
    backward_raw(net, ortho_ws, dpre_o, grads);

    adam.step(net, grads, lr);
    if (!net.all_finite()) throw NumericError("grad_step: non-finite parameter after update");
    return loss;
}

SepSpectralModel train(const Dataset& train_set, const TrainConfig& config) {
    config.validate();
    const std::size_t n = train_set.n();
    if (n < 20) throw std::invalid_argument("train: need at least 20 samples");
    if (!train_set.samples.all_finite()) throw DataError("train: non-finite sample values");

    SepSpectralModel model;
    model.config = config;
    model.net = make_mlp(train_set.dim(), config.hidden, config.k + 1);
    Rng root(config.seed);
    Rng init_rng = root.fork(kStreamInit);
    init_weights(model.net, init_rng);

    // Validation slice.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng val_rng = root.fork(kStreamValSplit);
    val_rng.shuffle(order);
    const auto n_val = static_cast<std::size_t>(config.val_frac * static_cast<double>(n));
    const std::size_t n_net = n - n_val;
    std::vector<std::uint32_t> val_idx(order.begin(), order.begin() + n_val);
    std::vector<std::uint32_t> net_idx(order.begin() + n_val, order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(net_idx.begin(), net_idx.end());

    const std::size_t m = std::min(config.batch_size, n_net);
    if (m < config.k + 2) throw std::invalid_argument("train: effective batch smaller than k + 2");
    const std::size_t knn_k = std::min(config.knn, m - 1);
    const std::size_t batches = n_net / m;

    // The validation graph is fixed, so build its Laplacian once.
    Matrix val_x;
    Laplacian val_lap;
    const bool use_val = n_val >= 8;
    if (use_val) {
        gather_rows(train_set.samples, val_idx, 0, n_val, val_x);
        val_lap = batch_laplacian(val_x, std::min(config.knn, n_val - 1), config.loss_variant);
    }

    const std::size_t patience = config.patience(n);
    Rng ortho_rng = root.fork(kStreamOrtho);
    Rng grad_rng = root.fork(kStreamGrad);
    Adam adam;
    adam.reset(model.net);
    // The ortho workspace keeps the orthogonalization batch's activations
    // alive across the paired grad step; see grad_step.
    MlpWorkspace ws_ortho, ws_grad;
    MlpGrads grads;
    Matrix batch;

    double lr = config.lr;
    double best = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;

    std::vector<std::uint32_t> ortho_order = net_idx;
    std::vector<std::uint32_t> grad_order = net_idx;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        ortho_rng.shuffle(ortho_order);
        grad_rng.shuffle(grad_order);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            gather_rows(train_set.samples, ortho_order, b * m, m, batch);
            int attempt = 0;
            while (true) {
                try {
                    const double dev = orthonorm_step(model.net, batch, ws_ortho);
                    model.meta.max_ortho_violation = std::max(model.meta.max_ortho_violation, dev);
                    break;
                } catch (const RankDeficientError&) {
                    if (++attempt >= kMaxOrthoRetries) throw;
                    // Fresh batch for the retry.
                    ortho_rng.shuffle(ortho_order);
                    gather_rows(train_set.samples, ortho_order, 0, m, batch);
                }
            }
            gather_rows(train_set.samples, grad_order, b * m, m, batch);
            const Laplacian lap = batch_laplacian(batch, knn_k, config.loss_variant);
            epoch_loss += grad_step(model.net, adam, batch, lap, lr, ws_grad, grads, ws_ortho);
        }
        epoch_loss /= static_cast<double>(batches);

        double monitored = epoch_loss;
        if (use_val) {
            Matrix y;
            forward(model.net, val_x, ws_grad, y);
            monitored = rq_loss(y, val_lap);
        }
        model.meta.train_curve.push_back(epoch_loss);
        model.meta.val_curve.push_back(monitored);
        model.meta.epochs = epoch + 1;

        // The first finite value always counts as an improvement.
        if (!std::isfinite(best) || monitored < best - kPlateauThreshold * std::fabs(best) - 1e-12) {
            best = monitored;
            stall = 0;
        } else if (++stall >= patience) {
            stall = 0;
            lr /= config.lr_divisor;
            ++model.meta.lr_reductions;
            if (lr < config.min_lr) break;
        }
    }
    model.meta.final_lr = lr;
    return model;
}

SeparationResult recover_rotation(const std::vector<Matrix>& ys, const std::vector<Laplacian>& laps) {
    if (ys.empty() || ys.size() != laps.size()) {
        throw std::invalid_argument("recover_rotation: need matching nonempty sample lists");
    }
    const std::size_t p = ys[0].cols();
    if (p < 2) throw std::invalid_argument("recover_rotation: need at least two output columns");

    Matrix acc(p, p);
    Matrix ly, term;
    for (std::size_t t = 0; t < ys.size(); ++t) {
        if (ys[t].cols() != p || ys[t].rows() != laps[t].n()) {
            throw std::invalid_argument("recover_rotation: sample shape mismatch");
        }
        laps[t].apply(ys[t], ly);
        matmul_tn(ys[t], ly, term);
        for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += term.data()[i];
    }
    const double inv_t = 1.0 / static_cast<double>(ys.size());
    Matrix sym(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            sym(i, j) = 0.5 * (acc(i, j) + acc(j, i)) * inv_t;
        }
    }

    EigResult eig = eig_sym(sym);
    double scale = 0.0;
    for (double v : eig.values) scale = std::max(scale, std::fabs(v));
    const double neg_tol = 1e-8 * std::max(1.0, scale);

    SeparationResult out;
    out.trivial_eigenvalue = eig.values[0];
    out.rotation.resize(p, p - 1);
    out.eigenvalues.resize(p - 1);
    for (std::size_t c = 1; c < p; ++c) {
        const double lambda = eig.values[c];
        if (lambda < -neg_tol) throw NumericError("recover_rotation: negative recovered eigenvalue");
        out.eigenvalues[c - 1] = std::max(0.0, lambda);
        for (std::size_t r = 0; r < p; ++r) out.rotation(r, c - 1) = eig.vectors(r, c);
    }
    return out;
}

void separate(SepSpectralModel& model, const Dataset& train_set) {
    if (model.net.layers() == 0) throw std::invalid_argument("separate: untrained model");
    if (train_set.dim() != model.net.input_dim()) throw DataError("separate: input width mismatch");
    const std::size_t n = train_set.n();
    const std::size_t m = std::min(model.config.batch_size, n);
    if (m < model.config.k + 2) throw std::invalid_argument("separate: too few samples");
    std::size_t t_batches = model.config.t_batches;
    if (t_batches == 0) t_batches = std::max<std::size_t>(1, n / m);
    const std::size_t knn_k = std::min(model.config.knn, m - 1);

    Rng rng = Rng(model.config.seed).fork(kStreamSeparate);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<Matrix> ys(t_batches);
    std::vector<Laplacian> laps(t_batches);
    MlpWorkspace ws;
    Matrix batch;
    std::size_t cursor = 0;
    const double unit = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t t = 0; t < t_batches; ++t) {
        if (cursor + m > n) {
            rng.shuffle(order);
            cursor = 0;
        }
        gather_rows(train_set.samples, order, cursor, m, batch);
        cursor += m;
        forward(model.net, batch, ws, ys[t]);
        // Outputs carry sqrt(m)-scaled columns by construction; rescale to
        // unit columns so the averaged quadratic forms sit on the Laplacian's
        // own eigenvalue scale.
        for (std::size_t i = 0; i < ys[t].size(); ++i) ys[t].data()[i] *= unit;
        laps[t] = batch_laplacian(batch, knn_k, model.config.separation_variant);
    }

    SeparationResult sep = recover_rotation(ys, laps);
    model.rotation = std::move(sep.rotation);
    model.eigenvalues = std::move(sep.eigenvalues);
}

Matrix forward_outputs(const SepSpectralModel& model, const Matrix& x) {
    if (x.cols() != model.net.input_dim()) throw DataError("forward: input width mismatch");
    MlpWorkspace ws;
    Matrix y;
    forward(model.net, x, ws, y);
    return y;
}

Matrix embed(const SepSpectralModel& model, const Matrix& x) {
    if (!model.separated()) throw std::invalid_argument("embed: model has no recovered rotation");
    const Matrix y = forward_outputs(model, x);
    Matrix out;
    matmul(y, model.rotation, out);
    return out;
}

namespace {

using nlohmann::json;
using detail::matrix_from_json;
using detail::matrix_to_json;

json config_to_json(const TrainConfig& c) {
    return json{{"k", c.k},
                {"batch_size", c.batch_size},
                {"knn", c.knn},
                {"hidden", c.hidden},
                {"lr", c.lr},
                {"min_lr", c.min_lr},
                {"lr_divisor", c.lr_divisor},
                {"val_frac", c.val_frac},
                {"max_epochs", c.max_epochs},
                {"t_batches", c.t_batches},
                {"seed", c.seed},
                {"loss_variant", variant_name(c.loss_variant)},
                {"separation_variant", variant_name(c.separation_variant)}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.k = j.at("k").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.knn = j.at("knn").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    c.lr = j.at("lr").get<double>();
    c.min_lr = j.at("min_lr").get<double>();
    c.lr_divisor = j.at("lr_divisor").get<double>();
    c.val_frac = j.at("val_frac").get<double>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.t_batches = j.at("t_batches").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.loss_variant = variant_from_name(j.at("loss_variant").get<std::string>());
    c.separation_variant = variant_from_name(j.at("separation_variant").get<std::string>());
    return c;
}

}  // namespace

std::string model_to_json(const SepSpectralModel& model) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "spectral_embedding";
    j["arch"] = {{"input_dim", model.net.input_dim()},
                 {"hidden", std::vector<std::size_t>(model.net.dims.begin() + 1, model.net.dims.end() - 1)},
                 {"output_dim", model.net.output_dim()}};
    j["layers"] = detail::layers_to_json(model.net);
    j["ortho_weights"] = matrix_to_json(model.net.ortho);
    j["rotation"] = model.separated() ? matrix_to_json(model.rotation) : json();
    j["eigenvalues"] = model.separated() ? json(model.eigenvalues) : json();
    j["config"] = config_to_json(model.config);
    j["train_meta"] = {{"epochs", model.meta.epochs},
                       {"train_curve", model.meta.train_curve},
                       {"val_curve", model.meta.val_curve},
                       {"final_lr", model.meta.final_lr},
                       {"lr_reductions", model.meta.lr_reductions},
                       {"max_ortho_violation", model.meta.max_ortho_violation}};
    return j.dump(2);
}

SepSpectralModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1) throw DataError("model file: unsupported format_version");
        if (j.at("kind").get<std::string>() != "spectral_embedding") {
            throw DataError("model file: not a spectral embedding model");
        }
        SepSpectralModel model;
        model.config = config_from_json(j.at("config"));
        const auto& arch = j.at("arch");
        model.net = make_mlp(arch.at("input_dim").get<std::size_t>(),
                             arch.at("hidden").get<std::vector<std::size_t>>(),
                             arch.at("output_dim").get<std::size_t>());
        detail::layers_from_json(j.at("layers"), model.net);
        model.net.ortho = matrix_from_json(j.at("ortho_weights"));
        if (model.net.ortho.rows() != model.net.output_dim() ||
            model.net.ortho.cols() != model.net.output_dim()) {
            throw DataError("model file: ortho shape mismatch");
        }
        if (!j.at("rotation").is_null()) {
            model.rotation = matrix_from_json(j.at("rotation"));
            model.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
            if (model.rotation.rows() != model.net.output_dim() ||
                model.rotation.cols() + 1 != model.net.output_dim() ||
                model.eigenvalues.size() != model.rotation.cols()) {
                throw DataError("model file: rotation shape mismatch");
            }
        }
        const auto& meta = j.at("train_meta");
        model.meta.epochs = meta.at("epochs").get<std::size_t>();
        model.meta.train_curve = meta.at("train_curve").get<std::vector<double>>();
        model.meta.val_curve = meta.at("val_curve").get<std::vector<double>>();
        model.meta.final_lr = meta.at("final_lr").get<double>();
        model.meta.lr_reductions = meta.at("lr_reductions").get<std::size_t>();
        model.meta.max_ortho_violation = meta.at("max_ortho_violation").get<double>();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void save_model(const SepSpectralModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << model_to_json(model) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

SepSpectralModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace sepspec
