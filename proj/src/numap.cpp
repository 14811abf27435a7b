#include "sepspec/numap.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "json_io.hpp"
#include "sepspec/error.hpp"
#include "sepspec/graph.hpp"
#include "sepspec/rng.hpp"

namespace sepspec {

namespace {

// Substream tags; disjoint from the spectral trainer's by construction since
// each stage forks from its own root seed.
enum : std::uint64_t {
    kStreamGInit = 0,
    kStreamNegatives = 1,
};

// Lower clamp for every log argument in the sampled cross-entropy.
constexpr double kLogFloor = 1e-4;

double pair_sqdist(const Matrix& y, std::uint32_t i, std::uint32_t j) {
    const double* a = y.row(i);
    const double* b = y.row(j);
    double s = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return s;
}

// w_l = 1 / (1 + a s^b) for squared distance s.
double low_weight(double s, double a, double b) {
    const double sb = (b == 1.0) ? s : std::pow(s, b);
    return 1.0 / (1.0 + a * sb);
}

void check_edges(const Matrix& y, const UmapEdgeSet& edges) {
    if (edges.n != y.rows()) throw std::invalid_argument("umap loss: edge set size mismatch");
    if (edges.edges.empty()) throw std::invalid_argument("umap loss: empty edge set");
}

}  // namespace

UmapEdgeSet build_umap_graph(const Matrix& x, std::size_t n_neighbors) {
    const SparseAffinity aff = affinity(knn(x, n_neighbors));
    UmapEdgeSet set;
    set.n = aff.n;
    for (std::size_t i = 0; i < aff.n; ++i) {
        for (std::size_t p = aff.row_ptr[i]; p < aff.row_ptr[i + 1]; ++p) {
            const std::uint32_t j = aff.col_idx[p];
            // Each undirected pair once; CSR stores both directions.
            if (j <= i) continue;
            set.edges.push_back({static_cast<std::uint32_t>(i), j, aff.weights[p]});
        }
    }
    return set;
}

double umap_edge_kl(double w_h, double w_l) {
    if (w_h < 0.0 || w_h > 1.0 || w_l <= 0.0 || w_l >= 1.0) {
        throw std::invalid_argument("umap_edge_kl: weights outside (0,1)");
    }
    double kl = 0.0;
    if (w_h > 0.0) kl += w_h * std::log(w_h / w_l);
    if (w_h < 1.0) kl += (1.0 - w_h) * std::log((1.0 - w_h) / (1.0 - w_l));
    return kl;
}

double umap_loss(const Matrix& y, const UmapEdgeSet& edges, const std::vector<UmapNegative>& negs,
                 double a, double b) {
    check_edges(y, edges);
    double attract = 0.0;
    for (const UmapEdge& e : edges.edges) {
        const double wl = low_weight(pair_sqdist(y, e.i, e.j), a, b);
        attract -= e.weight * std::log(std::max(wl, kLogFloor));
    }
    double repulse = 0.0;
    for (const UmapNegative& ng : negs) {
        const double wl = low_weight(pair_sqdist(y, ng.i, ng.v), a, b);
        repulse -= std::log(std::max(1.0 - wl, kLogFloor));
    }
    return (attract + repulse) / static_cast<double>(edges.edges.size());
}

double umap_loss_grad(const Matrix& y, const UmapEdgeSet& edges,
                      const std::vector<UmapNegative>& negs, double a, double b, Matrix& dy) {
    check_edges(y, edges);
    dy.resize(y.rows(), y.cols());
    dy.fill(0.0);
    const double inv_e = 1.0 / static_cast<double>(edges.edges.size());
    double loss = 0.0;

    // d w_l / d s = -a b s^(b-1) w_l^2; the chain through s = ||y_i - y_j||^2
    // adds 2 (y_i - y_j) for row i and the negative for row j.
    for (const UmapEdge& e : edges.edges) {
        const double s = pair_sqdist(y, e.i, e.j);
        const double wl = low_weight(s, a, b);
        loss -= inv_e * e.weight * std::log(std::max(wl, kLogFloor));
        if (wl <= kLogFloor) continue;  // clamped: flat in Y
        const double pw = (b == 1.0) ? 1.0 : std::pow(s, b - 1.0);
        // d(-w log w_l)/ds = w a b s^(b-1) w_l.
        const double dls = inv_e * e.weight * a * b * pw * wl;
        const double* yi = y.row(e.i);
        const double* yj = y.row(e.j);
        double* gi = dy.row(e.i);
        double* gj = dy.row(e.j);
        for (std::size_t c = 0; c < y.cols(); ++c) {
            const double g = dls * 2.0 * (yi[c] - yj[c]);
            gi[c] += g;
            gj[c] -= g;
        }
    }
    for (const UmapNegative& ng : negs) {
        const double s = pair_sqdist(y, ng.i, ng.v);
        const double wl = low_weight(s, a, b);
        loss -= inv_e * std::log(std::max(1.0 - wl, kLogFloor));
        if (1.0 - wl <= kLogFloor) continue;
        const double pw = (b == 1.0) ? 1.0 : std::pow(s, b - 1.0);
        // d(-log(1 - w_l))/ds = -a b s^(b-1) w_l^2 / (1 - w_l).
        const double dls = -inv_e * a * b * pw * wl * wl / (1.0 - wl);
        const double* yi = y.row(ng.i);
        const double* yv = y.row(ng.v);
        double* gi = dy.row(ng.i);
        double* gv = dy.row(ng.v);
        for (std::size_t c = 0; c < y.cols(); ++c) {
            const double g = dls * 2.0 * (yi[c] - yv[c]);
            gi[c] += g;
            gv[c] -= g;
        }
    }
    return loss;
}

void NumapConfig::validate() const {
    if (out_dim == 0) throw std::invalid_argument("numap config: out_dim must be positive");
    if (use_se && out_dim > se.k) {
        throw std::invalid_argument("numap config: out_dim exceeds the spectral dimension");
    }
    if (n_neighbors == 0) throw std::invalid_argument("numap config: n_neighbors must be positive");
    if (kernel_a <= 0.0 || kernel_b <= 0.0) {
        throw std::invalid_argument("numap config: kernel parameters must be positive");
    }
    if (lr <= 0.0) throw std::invalid_argument("numap config: lr must be positive");
    if (epochs == 0) throw std::invalid_argument("numap config: epochs must be positive");
    if (use_se) se.validate();
}

namespace {

// Inputs of the refinement network: separated spectral coordinates, or the
// raw samples for the baseline.
Matrix stage2_inputs(const NumapModel& model, const Matrix& x) {
    if (model.config.use_se) return embed(model.se_model, x);
    return x;
}

void add_residual(const NumapConfig& config, const Matrix& z, Matrix& y) {
    if (!(config.residual && config.use_se)) return;
    for (std::size_t r = 0; r < y.rows(); ++r) {
        const double* zr = z.row(r);
        double* yr = y.row(r);
        for (std::size_t c = 0; c < config.out_dim; ++c) yr[c] += zr[c];
    }
}

}  // namespace

NumapModel train_numap(const Dataset& train_set, const NumapConfig& config) {
    config.validate();
    const std::size_t n = train_set.n();
    if (n <= config.n_neighbors) throw std::invalid_argument("train_numap: need more samples than neighbors");
    if (!train_set.samples.all_finite()) throw DataError("train_numap: non-finite sample values");

    NumapModel model;
    model.config = config;
    if (config.use_se) {
        TrainConfig se_cfg = config.se;
        model.se_model = train(train_set, se_cfg);
        separate(model.se_model, train_set);
    }
    const Matrix z = stage2_inputs(model, train_set.samples);

    Rng root(config.seed);
    model.g_net = make_mlp(z.cols(), config.g_hidden, config.out_dim);
    Rng init_rng = root.fork(kStreamGInit);
    init_weights(model.g_net, init_rng);
    if (config.residual && config.use_se) {
        // Zero final layer: the initial embedding is exactly the first
        // out_dim spectral coordinates.
        model.g_net.weights.back().fill(0.0);
    }

    const UmapEdgeSet edges = build_umap_graph(train_set.samples, config.n_neighbors);
    Rng neg_rng = root.fork(kStreamNegatives);
    std::vector<UmapNegative> negs;
    negs.reserve(edges.edges.size() * config.neg_samples);
    const auto draw_negatives = [&] {
        negs.clear();
        for (const UmapEdge& e : edges.edges) {
            for (std::size_t t = 0; t < config.neg_samples; ++t) {
                // Anchor alternates between the endpoints; the partner is
                // uniform over all vertices. Coincidental hits on the edge
                // itself are harmless: the clamp zeroes their gradient.
                const std::uint32_t anchor = (t % 2 == 0) ? e.i : e.j;
                negs.push_back({anchor, static_cast<std::uint32_t>(neg_rng.index(n))});
            }
        }
    };
    draw_negatives();

    Adam adam;
    adam.reset(model.g_net);
    MlpWorkspace ws;
    MlpGrads grads;
    Matrix y, dy;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (epoch > 0 && config.resample_negatives) draw_negatives();
        forward_raw(model.g_net, z, ws, y);
        add_residual(config, z, y);
        const double loss = umap_loss_grad(y, edges, negs, config.kernel_a, config.kernel_b, dy);
        if (!std::isfinite(loss)) throw NumericError("train_numap: non-finite loss");
        grads.reset(model.g_net);
        backward_raw(model.g_net, ws, dy, grads);
        adam.step(model.g_net, grads, config.lr);
        if (!model.g_net.all_finite()) throw NumericError("train_numap: non-finite parameter");
        model.loss_curve.push_back(loss);
    }
    return model;
}

Matrix embed_numap(const NumapModel& model, const Matrix& x) {
    const std::size_t want = model.config.use_se ? model.se_model.net.input_dim()
                                                 : model.g_net.input_dim();
    if (x.cols() != want) throw std::invalid_argument("embed_numap: dimension mismatch");
    const Matrix z = stage2_inputs(model, x);
    MlpWorkspace ws;
    Matrix y;
    forward_raw(model.g_net, z, ws, y);
    add_residual(model.config, z, y);
    return y;
}

namespace {

using nlohmann::json;

json numap_config_to_json(const NumapConfig& c) {
    return json{{"out_dim", c.out_dim},
                {"n_neighbors", c.n_neighbors},
                {"kernel_a", c.kernel_a},
                {"kernel_b", c.kernel_b},
                {"neg_samples", c.neg_samples},
                {"g_hidden", c.g_hidden},
                {"lr", c.lr},
                {"epochs", c.epochs},
                {"residual", c.residual},
                {"use_se", c.use_se},
                {"resample_negatives", c.resample_negatives},
                {"seed", c.seed}};
}

NumapConfig numap_config_from_json(const json& j) {
    NumapConfig c;
    c.out_dim = j.at("out_dim").get<std::size_t>();
    c.n_neighbors = j.at("n_neighbors").get<std::size_t>();
    c.kernel_a = j.at("kernel_a").get<double>();
    c.kernel_b = j.at("kernel_b").get<double>();
    c.neg_samples = j.at("neg_samples").get<std::size_t>();
    c.g_hidden = j.at("g_hidden").get<std::vector<std::size_t>>();
    c.lr = j.at("lr").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.residual = j.at("residual").get<bool>();
    c.use_se = j.at("use_se").get<bool>();
    c.resample_negatives = j.at("resample_negatives").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::string numap_to_json(const NumapModel& model) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "numap";
    j["config"] = numap_config_to_json(model.config);
    // The embedded spectral model carries its own training config.
    j["se_model"] = model.config.use_se ? json::parse(model_to_json(model.se_model)) : json();
    j["g_arch"] = {{"input_dim", model.g_net.input_dim()},
                   {"hidden", std::vector<std::size_t>(model.g_net.dims.begin() + 1,
                                                       model.g_net.dims.end() - 1)},
                   {"output_dim", model.g_net.output_dim()}};
    j["g_layers"] = detail::layers_to_json(model.g_net);
    j["loss_curve"] = model.loss_curve;
    return j.dump(2);
}

NumapModel numap_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1) throw DataError("model file: unsupported format_version");
        if (j.at("kind").get<std::string>() != "numap") throw DataError("model file: not a numap model");
        NumapModel model;
        model.config = numap_config_from_json(j.at("config"));
        if (model.config.use_se) {
            model.se_model = model_from_json(j.at("se_model").dump());
            model.config.se = model.se_model.config;
        }
        const auto& arch = j.at("g_arch");
        model.g_net = make_mlp(arch.at("input_dim").get<std::size_t>(),
                               arch.at("hidden").get<std::vector<std::size_t>>(),
                               arch.at("output_dim").get<std::size_t>());
        detail::layers_from_json(j.at("g_layers"), model.g_net);
        model.loss_curve = j.at("loss_curve").get<std::vector<double>>();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void save_numap(const NumapModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << numap_to_json(model) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

NumapModel load_numap(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return numap_from_json(buf.str());
}

}  // namespace sepspec
