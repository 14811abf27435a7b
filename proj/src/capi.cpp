#include "sepspec.h"

#include <cstring>
#include <exception>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sepspec/apps.hpp"
#include "sepspec/dataset.hpp"
#include "sepspec/error.hpp"
#include "sepspec/graph.hpp"
#include "sepspec/linalg.hpp"
#include "sepspec/matrix.hpp"
#include "sepspec/metrics.hpp"
#include "sepspec/numap.hpp"
#include "sepspec/specnet.hpp"

namespace {

thread_local std::string tl_error;

int fail(int code, const std::string& msg) {
    tl_error = msg;
    return code;
}

// Exceptions cross the C boundary as status codes: misuse maps to ARG, bad
// input to DATA, numerical breakdown (and anything unforeseen) to NUMERIC.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const sepspec::DataError& e) {
        return fail(SEPSPEC_ERR_DATA, e.what());
    } catch (const sepspec::NumericError& e) {
        return fail(SEPSPEC_ERR_NUMERIC, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(SEPSPEC_ERR_ARG, e.what());
    } catch (const std::exception& e) {
        return fail(SEPSPEC_ERR_NUMERIC, e.what());
    }
}

enum class KeyType { count, real, boolean, layer_list, variant_name };

struct KeySpec {
    KeyType type;
    const char* fallback;  // default, as text
};

// One flat registry; prefixed "se." keys mirror the training keys for the
// NUMAP stage-1 configuration.
const std::map<std::string, KeySpec>& key_registry() {
    static const std::map<std::string, KeySpec> reg = {
        // training
        {"k", {KeyType::count, "2"}},
        {"batch_size", {KeyType::count, "2048"}},
        {"knn", {KeyType::count, "20"}},
        {"hidden", {KeyType::layer_list, "256,256,512"}},
        {"lr", {KeyType::real, "0.01"}},
        {"min_lr", {KeyType::real, "1e-7"}},
        {"lr_divisor", {KeyType::real, "10"}},
        {"val_frac", {KeyType::real, "0.1"}},
        {"max_epochs", {KeyType::count, "100000"}},
        {"t_batches", {KeyType::count, "0"}},
        {"seed", {KeyType::count, "1"}},
        {"loss_variant", {KeyType::variant_name, "unnormalized"}},
        {"separation_variant", {KeyType::variant_name, "random_walk"}},
        // numap
        {"out_dim", {KeyType::count, "2"}},
        {"n_neighbors", {KeyType::count, "10"}},
        {"kernel_a", {KeyType::real, "1"}},
        {"kernel_b", {KeyType::real, "1"}},
        {"neg_samples", {KeyType::count, "5"}},
        {"g_hidden", {KeyType::layer_list, "200,200,200"}},
        {"numap_lr", {KeyType::real, "0.001"}},
        {"numap_epochs", {KeyType::count, "150"}},
        {"residual", {KeyType::boolean, "true"}},
        {"use_se", {KeyType::boolean, "true"}},
        {"resample_negatives", {KeyType::boolean, "true"}},
        // evaluation
        {"gs_t_vecs", {KeyType::count, "2"}},
        {"gs_neighbors", {KeyType::count, "50"}},
        {"oracle_knn", {KeyType::count, "20"}},
        {"knn_k", {KeyType::count, "5"}},
        {"oracle_variant", {KeyType::variant_name, "unnormalized"}},
    };
    return reg;
}

const KeySpec* lookup_key(const std::string& key) {
    std::string base = key;
    if (base.rfind("se.", 0) == 0) {
        base = base.substr(3);
        static const char* kTrainKeys[] = {"k",        "batch_size", "knn",
                                           "hidden",   "lr",         "min_lr",
                                           "lr_divisor", "val_frac",   "max_epochs",
                                           "t_batches", "seed",       "loss_variant",
                                           "separation_variant"};
        bool is_train = false;
        for (const char* t : kTrainKeys) {
            if (base == t) is_train = true;
        }
        if (!is_train) return nullptr;
    }
    auto it = key_registry().find(base);
    return it == key_registry().end() ? nullptr : &it->second;
}

std::size_t parse_count(const std::string& v) {
    std::size_t pos = 0;
    const unsigned long long raw = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: trailing text in '" + v + "'");
    return static_cast<std::size_t>(raw);
}

double parse_real(const std::string& v) {
    std::size_t pos = 0;
    const double raw = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: trailing text in '" + v + "'");
    return raw;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: expected true/false, got '" + v + "'");
}

std::vector<std::size_t> parse_layers(const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw std::invalid_argument("config: empty layer width in '" + v + "'");
        out.push_back(parse_count(item));
        if (out.back() == 0) throw std::invalid_argument("config: zero layer width");
    }
    if (out.empty()) throw std::invalid_argument("config: empty layer list");
    return out;
}

sepspec::LaplacianVariant parse_variant(const std::string& v) {
    if (v == "unnormalized") return sepspec::LaplacianVariant::unnormalized;
    if (v == "symmetric") return sepspec::LaplacianVariant::symmetric;
    if (v == "random_walk") return sepspec::LaplacianVariant::random_walk;
    throw std::invalid_argument("config: unknown Laplacian variant '" + v + "'");
}

void check_value(KeyType type, const std::string& value) {
    switch (type) {
        case KeyType::count: parse_count(value); break;
        case KeyType::real: parse_real(value); break;
        case KeyType::boolean: parse_bool(value); break;
        case KeyType::layer_list: parse_layers(value); break;
        case KeyType::variant_name: parse_variant(value); break;
    }
}

}  // namespace

struct sepspec_dataset {
    sepspec::Dataset data;
};

struct sepspec_config {
    std::map<std::string, std::string> values;

    std::string get(const std::string& key) const {
        auto it = values.find(key);
        if (it != values.end()) return it->second;
        if (key.rfind("se.", 0) == 0) {
            // Unset stage-1 keys fall back to the registry's training default.
            auto reg = key_registry().find(key.substr(3));
            return reg->second.fallback;
        }
        return key_registry().at(key).fallback;
    }
};

struct sepspec_model {
    sepspec::SepSpectralModel model;
};

struct sepspec_numap {
    sepspec::NumapModel model;
};

namespace {

sepspec::TrainConfig train_config_from(const sepspec_config* cfg, const std::string& prefix) {
    sepspec::TrainConfig out;
    if (cfg == nullptr) return out;
    auto val = [&](const char* key) { return cfg->get(prefix + key); };
    out.k = parse_count(val("k"));
    out.batch_size = parse_count(val("batch_size"));
    out.knn = parse_count(val("knn"));
    out.hidden = parse_layers(val("hidden"));
    out.lr = parse_real(val("lr"));
    out.min_lr = parse_real(val("min_lr"));
    out.lr_divisor = parse_real(val("lr_divisor"));
    out.val_frac = parse_real(val("val_frac"));
    out.max_epochs = parse_count(val("max_epochs"));
    out.t_batches = parse_count(val("t_batches"));
    out.seed = parse_count(val("seed"));
    out.loss_variant = parse_variant(val("loss_variant"));
    out.separation_variant = parse_variant(val("separation_variant"));
    return out;
}

sepspec::NumapConfig numap_config_from(const sepspec_config* cfg) {
    sepspec::NumapConfig out;
    if (cfg == nullptr) return out;
    out.out_dim = parse_count(cfg->get("out_dim"));
    out.n_neighbors = parse_count(cfg->get("n_neighbors"));
    out.kernel_a = parse_real(cfg->get("kernel_a"));
    out.kernel_b = parse_real(cfg->get("kernel_b"));
    out.neg_samples = parse_count(cfg->get("neg_samples"));
    out.g_hidden = parse_layers(cfg->get("g_hidden"));
    out.lr = parse_real(cfg->get("numap_lr"));
    out.epochs = parse_count(cfg->get("numap_epochs"));
    out.residual = parse_bool(cfg->get("residual"));
    out.use_se = parse_bool(cfg->get("use_se"));
    out.resample_negatives = parse_bool(cfg->get("resample_negatives"));
    out.seed = parse_count(cfg->get("seed"));
    out.se = train_config_from(cfg, "se.");
    return out;
}

sepspec::Matrix matrix_from(const double* data, std::size_t n, std::size_t dim) {
    if (data == nullptr) throw std::invalid_argument("null data pointer");
    if (n == 0 || dim == 0) throw std::invalid_argument("empty matrix");
    sepspec::Matrix m(n, dim);
    std::memcpy(m.data(), data, n * dim * sizeof(double));
    return m;
}

}  // namespace

extern "C" {

const char* sepspec_version(void) { return "1.0.0"; }

const char* sepspec_last_error(void) { return tl_error.c_str(); }

int sepspec_dataset_generate(const char* kind, size_t n, size_t ambient_dim, double noise,
                             uint64_t seed, int step, sepspec_dataset** out) {
    return guarded([&] {
        if (kind == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "generate: null argument");
        sepspec::GenSpec spec;
        spec.kind = sepspec::kind_from_name(kind);
        spec.n = n;
        spec.ambient_dim = ambient_dim;
        spec.noise = noise;
        spec.seed = seed;
        spec.step = step;
        auto* handle = new sepspec_dataset{sepspec::gen_synthetic(spec)};
        *out = handle;
        return SEPSPEC_OK;
    });
}

int sepspec_dataset_from_arrays(const double* data, size_t n, size_t dim, const int32_t* labels,
                                sepspec_dataset** out) {
    return guarded([&] {
        if (out == nullptr) return fail(SEPSPEC_ERR_ARG, "from_arrays: null output");
        sepspec::Dataset d;
        d.samples = matrix_from(data, n, dim);
        if (labels != nullptr) d.labels.assign(labels, labels + n);
        if (!d.samples.all_finite()) return fail(SEPSPEC_ERR_DATA, "from_arrays: non-finite value");
        *out = new sepspec_dataset{std::move(d)};
        return SEPSPEC_OK;
    });
}

int sepspec_dataset_load_csv(const char* path, sepspec_dataset** out) {
    return guarded([&] {
        if (path == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "load_csv: null argument");
        *out = new sepspec_dataset{sepspec::load_csv(path)};
        return SEPSPEC_OK;
    });
}

int sepspec_dataset_save_csv(const sepspec_dataset* d, const char* path) {
    return guarded([&] {
        if (d == nullptr || path == nullptr)
            return fail(SEPSPEC_ERR_ARG, "save_csv: null argument");
        sepspec::save_csv(d->data, path);
        return SEPSPEC_OK;
    });
}

int sepspec_dataset_split(const sepspec_dataset* d, double train_frac, uint64_t seed,
                          sepspec_dataset** train_out, sepspec_dataset** test_out) {
    return guarded([&] {
        if (d == nullptr || train_out == nullptr || test_out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "split: null argument");
        sepspec::SplitPair pair = sepspec::split(d->data, train_frac, seed);
        *train_out = new sepspec_dataset{std::move(pair.train)};
        *test_out = new sepspec_dataset{std::move(pair.test)};
        return SEPSPEC_OK;
    });
}

size_t sepspec_dataset_n(const sepspec_dataset* d) { return d == nullptr ? 0 : d->data.n(); }

size_t sepspec_dataset_dim(const sepspec_dataset* d) { return d == nullptr ? 0 : d->data.dim(); }

int sepspec_dataset_has_labels(const sepspec_dataset* d) {
    return d != nullptr && d->data.has_labels() ? 1 : 0;
}

int sepspec_dataset_copy_data(const sepspec_dataset* d, double* out) {
    return guarded([&] {
        if (d == nullptr || out == nullptr) return fail(SEPSPEC_ERR_ARG, "copy_data: null argument");
        std::memcpy(out, d->data.samples.data(), d->data.samples.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_dataset_copy_labels(const sepspec_dataset* d, int32_t* out) {
    return guarded([&] {
        if (d == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "copy_labels: null argument");
        if (!d->data.has_labels()) return fail(SEPSPEC_ERR_ARG, "copy_labels: dataset unlabeled");
        std::memcpy(out, d->data.labels.data(), d->data.labels.size() * sizeof(int32_t));
        return SEPSPEC_OK;
    });
}

void sepspec_dataset_destroy(sepspec_dataset* d) { delete d; }

int sepspec_config_create(sepspec_config** out) {
    return guarded([&] {
        if (out == nullptr) return fail(SEPSPEC_ERR_ARG, "config_create: null output");
        *out = new sepspec_config{};
        return SEPSPEC_OK;
    });
}

int sepspec_config_set(sepspec_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        if (cfg == nullptr || key == nullptr || value == nullptr)
            return fail(SEPSPEC_ERR_ARG, "config_set: null argument");
        const KeySpec* spec = lookup_key(key);
        if (spec == nullptr)
            return fail(SEPSPEC_ERR_ARG, std::string("config: unknown key '") + key + "'");
        check_value(spec->type, value);
        cfg->values[key] = value;
        return SEPSPEC_OK;
    });
}

int sepspec_config_get(const sepspec_config* cfg, const char* key, char* buf, size_t buf_len) {
    return guarded([&] {
        if (cfg == nullptr || key == nullptr || buf == nullptr)
            return fail(SEPSPEC_ERR_ARG, "config_get: null argument");
        if (lookup_key(key) == nullptr)
            return fail(SEPSPEC_ERR_ARG, std::string("config: unknown key '") + key + "'");
        const std::string v = cfg->get(key);
        if (v.size() + 1 > buf_len) return fail(SEPSPEC_ERR_ARG, "config_get: buffer too small");
        std::memcpy(buf, v.c_str(), v.size() + 1);
        return SEPSPEC_OK;
    });
}

void sepspec_config_destroy(sepspec_config* cfg) { delete cfg; }

int sepspec_train(const sepspec_dataset* train, const sepspec_config* cfg, sepspec_model** out) {
    return guarded([&] {
        if (train == nullptr || out == nullptr) return fail(SEPSPEC_ERR_ARG, "train: null argument");
        const sepspec::TrainConfig tc = train_config_from(cfg, "");
        *out = new sepspec_model{sepspec::train(train->data, tc)};
        return SEPSPEC_OK;
    });
}

int sepspec_separate(sepspec_model* model, const sepspec_dataset* train) {
    return guarded([&] {
        if (model == nullptr || train == nullptr)
            return fail(SEPSPEC_ERR_ARG, "separate: null argument");
        sepspec::separate(model->model, train->data);
        return SEPSPEC_OK;
    });
}

int sepspec_embed(const sepspec_model* model, const double* x, size_t n, size_t dim, double* out) {
    return guarded([&] {
        if (model == nullptr || out == nullptr) return fail(SEPSPEC_ERR_ARG, "embed: null argument");
        const sepspec::Matrix y = sepspec::embed(model->model, matrix_from(x, n, dim));
        std::memcpy(out, y.data(), y.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_forward_raw(const sepspec_model* model, const double* x, size_t n, size_t dim,
                        double* out) {
    return guarded([&] {
        if (model == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "forward_raw: null argument");
        const sepspec::Matrix y = sepspec::forward_outputs(model->model, matrix_from(x, n, dim));
        std::memcpy(out, y.data(), y.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

size_t sepspec_model_k(const sepspec_model* model) {
    return model == nullptr ? 0 : model->model.embed_dim();
}

int sepspec_model_separated(const sepspec_model* model) {
    return model != nullptr && model->model.separated() ? 1 : 0;
}

int sepspec_model_eigenvalues(const sepspec_model* model, double* out) {
    return guarded([&] {
        if (model == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "eigenvalues: null argument");
        if (!model->model.separated())
            return fail(SEPSPEC_ERR_ARG, "eigenvalues: model not separated");
        std::memcpy(out, model->model.eigenvalues.data(),
                    model->model.eigenvalues.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_model_epochs(const sepspec_model* model, size_t* out) {
    return guarded([&] {
        if (model == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "epochs: null argument");
        *out = model->model.meta.epochs;
        return SEPSPEC_OK;
    });
}

int sepspec_model_save(const sepspec_model* model, const char* path) {
    return guarded([&] {
        if (model == nullptr || path == nullptr)
            return fail(SEPSPEC_ERR_ARG, "model_save: null argument");
        sepspec::save_model(model->model, path);
        return SEPSPEC_OK;
    });
}

int sepspec_model_load(const char* path, sepspec_model** out) {
    return guarded([&] {
        if (path == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "model_load: null argument");
        *out = new sepspec_model{sepspec::load_model(path)};
        return SEPSPEC_OK;
    });
}

void sepspec_model_destroy(sepspec_model* model) { delete model; }

int sepspec_oracle_embed(const sepspec_dataset* d, const char* variant, size_t k,
                         int include_trivial, size_t knn_k, double* vectors_out,
                         double* values_out) {
    return guarded([&] {
        if (d == nullptr || variant == nullptr)
            return fail(SEPSPEC_ERR_ARG, "oracle_embed: null argument");
        const sepspec::Laplacian lap = sepspec::laplacian(
            sepspec::affinity(sepspec::knn(d->data.samples, knn_k)), parse_variant(variant));
        const sepspec::SpectralResult res =
            sepspec::spectral_oracle(lap, k, include_trivial != 0);
        if (vectors_out != nullptr)
            std::memcpy(vectors_out, res.vectors.data(), res.vectors.size() * sizeof(double));
        if (values_out != nullptr)
            std::memcpy(values_out, res.values.data(), res.values.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_sin2_per_vector(const double* a, const double* b, size_t n, size_t k, double* out) {
    return guarded([&] {
        if (out == nullptr) return fail(SEPSPEC_ERR_ARG, "sin2: null output");
        const sepspec::Matrix ma = matrix_from(a, n, k);
        const sepspec::Matrix mb = matrix_from(b, n, k);
        for (std::size_t c = 0; c < k; ++c) {
            out[c] = sepspec::sin2_distance(ma.col(c), mb.col(c));
        }
        return SEPSPEC_OK;
    });
}

int sepspec_grassmann_distance(const double* a, const double* b, size_t n, size_t k, double* out) {
    return guarded([&] {
        if (out == nullptr) return fail(SEPSPEC_ERR_ARG, "grassmann: null output");
        *out = sepspec::grassmann_distance(matrix_from(a, n, k), matrix_from(b, n, k));
        return SEPSPEC_OK;
    });
}

int sepspec_grassmann_score(const double* x, size_t n, size_t d, const double* y, size_t y_dim,
                            const sepspec_config* cfg, double* out) {
    return guarded([&] {
        if (out == nullptr) return fail(SEPSPEC_ERR_ARG, "gs: null output");
        sepspec::GsConfig gc;
        if (cfg != nullptr) {
            gc.t_vecs = parse_count(cfg->get("gs_t_vecs"));
            gc.neighbors = parse_count(cfg->get("gs_neighbors"));
        }
        *out = sepspec::grassmann_score(matrix_from(x, n, d), matrix_from(y, n, y_dim), gc).score;
        return SEPSPEC_OK;
    });
}

int sepspec_knn_accuracy(const double* train_y, const int32_t* train_labels, size_t train_n,
                         const double* eval_y, const int32_t* eval_labels, size_t eval_n,
                         size_t dim, size_t knn_k, double* out) {
    return guarded([&] {
        if (train_labels == nullptr || eval_labels == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "knn_accuracy: null argument");
        const std::vector<std::int32_t> tl(train_labels, train_labels + train_n);
        const std::vector<std::int32_t> el(eval_labels, eval_labels + eval_n);
        *out = sepspec::knn_accuracy(matrix_from(train_y, train_n, dim), tl,
                                     matrix_from(eval_y, eval_n, dim), el, knn_k);
        return SEPSPEC_OK;
    });
}

int sepspec_pearson(const double* a, const double* b, size_t len, double* out) {
    return guarded([&] {
        if (a == nullptr || b == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "pearson: null argument");
        const std::vector<double> va(a, a + len), vb(b, b + len);
        *out = sepspec::pearson(va, vb);
        return SEPSPEC_OK;
    });
}

int sepspec_evaluate(const sepspec_model* model, const sepspec_dataset* train,
                     const sepspec_dataset* test, const sepspec_config* cfg, char* buf,
                     size_t buf_len) {
    return guarded([&] {
        if (model == nullptr || train == nullptr || buf == nullptr)
            return fail(SEPSPEC_ERR_ARG, "evaluate: null argument");
        sepspec::EvalConfig ec;
        if (cfg != nullptr) {
            ec.oracle_knn = parse_count(cfg->get("oracle_knn"));
            ec.gs_t_vecs = parse_count(cfg->get("gs_t_vecs"));
            ec.gs_neighbors = parse_count(cfg->get("gs_neighbors"));
            ec.knn_k = parse_count(cfg->get("knn_k"));
            ec.oracle_variant = parse_variant(cfg->get("oracle_variant"));
        }
        const sepspec::EvalReport report = sepspec::evaluate_model(
            model->model, train->data, test == nullptr ? nullptr : &test->data, ec);
        const std::string json = sepspec::eval_report_to_json(report);
        if (json.size() + 1 > buf_len) return fail(SEPSPEC_ERR_ARG, "evaluate: buffer too small");
        std::memcpy(buf, json.c_str(), json.size() + 1);
        return SEPSPEC_OK;
    });
}

int sepspec_fiedler(const sepspec_dataset* d, size_t knn_k, const char* variant, double* value_out,
                    double* vector_out) {
    return guarded([&] {
        if (d == nullptr || variant == nullptr || value_out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "fiedler: null argument");
        const sepspec::Laplacian lap = sepspec::laplacian(
            sepspec::affinity(sepspec::knn(d->data.samples, knn_k)), parse_variant(variant));
        const sepspec::FiedlerResult res = sepspec::fiedler(lap);
        *value_out = res.value;
        if (vector_out != nullptr)
            std::memcpy(vector_out, res.vector.data(), res.vector.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_model_fiedler(const sepspec_model* model, const double* x, size_t n, size_t dim,
                          double* value_out, double* vector_out) {
    return guarded([&] {
        if (model == nullptr || value_out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "model_fiedler: null argument");
        const sepspec::FiedlerResult res =
            sepspec::fiedler(model->model, matrix_from(x, n, dim));
        *value_out = res.value;
        if (vector_out != nullptr)
            std::memcpy(vector_out, res.vector.data(), res.vector.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_diffusion(const sepspec_dataset* d, size_t knn_k, size_t k, double t, double* out) {
    return guarded([&] {
        if (d == nullptr || out == nullptr) return fail(SEPSPEC_ERR_ARG, "diffusion: null argument");
        const sepspec::SparseAffinity aff = sepspec::affinity(sepspec::knn(d->data.samples, knn_k));
        const sepspec::DiffusionResult res = sepspec::diffusion_map(aff, k, t);
        std::memcpy(out, res.coords.data(), res.coords.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_model_diffusion(const sepspec_model* model, const double* x, size_t n, size_t dim,
                            double t, double* out) {
    return guarded([&] {
        if (model == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "model_diffusion: null argument");
        const sepspec::DiffusionResult res =
            sepspec::diffusion_map(model->model, matrix_from(x, n, dim), t);
        std::memcpy(out, res.coords.data(), res.coords.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

int sepspec_numap_train(const sepspec_dataset* train, const sepspec_config* cfg,
                        sepspec_numap** out) {
    return guarded([&] {
        if (train == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "numap_train: null argument");
        const sepspec::NumapConfig nc = numap_config_from(cfg);
        *out = new sepspec_numap{sepspec::train_numap(train->data, nc)};
        return SEPSPEC_OK;
    });
}

int sepspec_numap_embed(const sepspec_numap* model, const double* x, size_t n, size_t dim,
                        double* out) {
    return guarded([&] {
        if (model == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "numap_embed: null argument");
        const sepspec::Matrix y = sepspec::embed_numap(model->model, matrix_from(x, n, dim));
        std::memcpy(out, y.data(), y.size() * sizeof(double));
        return SEPSPEC_OK;
    });
}

size_t sepspec_numap_out_dim(const sepspec_numap* model) {
    return model == nullptr ? 0 : model->model.out_dim();
}

int sepspec_numap_save(const sepspec_numap* model, const char* path) {
    return guarded([&] {
        if (model == nullptr || path == nullptr)
            return fail(SEPSPEC_ERR_ARG, "numap_save: null argument");
        sepspec::save_numap(model->model, path);
        return SEPSPEC_OK;
    });
}

int sepspec_numap_load(const char* path, sepspec_numap** out) {
    return guarded([&] {
        if (path == nullptr || out == nullptr)
            return fail(SEPSPEC_ERR_ARG, "numap_load: null argument");
        *out = new sepspec_numap{sepspec::load_numap(path)};
        return SEPSPEC_OK;
    });
}

void sepspec_numap_destroy(sepspec_numap* model) { delete model; }

}  // extern "C"
