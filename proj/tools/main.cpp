// Command-line front end. Links the shared C library only; everything here is
// argument plumbing, config-file handling, and manifest bookkeeping.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepspec.h"

namespace {

using nlohmann::json;

// Thrown after any failing library call; carries the status for the exit code.
struct LibError : std::runtime_error {
    int status;
    LibError(int s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(int status) {
    if (status != SEPSPEC_OK) throw LibError(status, sepspec_last_error());
}

// Owning wrapper for a C handle; move-only so a stray copy cannot double-free.
template <typename T, void (*Destroy)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(Handle&& o) noexcept : p(std::exchange(o.p, nullptr)) {}
    Handle& operator=(Handle&& o) noexcept {
        if (this != &o) {
            Destroy(p);
            p = std::exchange(o.p, nullptr);
        }
        return *this;
    }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Destroy(p); }
};

using DatasetHandle = Handle<sepspec_dataset, sepspec_dataset_destroy>;
using ModelHandle = Handle<sepspec_model, sepspec_model_destroy>;
using NumapHandle = Handle<sepspec_numap, sepspec_numap_destroy>;

// Owned key-value config, mirrored into the library handle on build so the
// manifest can echo exactly what was applied.
struct ConfigBag {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& key, const std::string& value) {
        for (auto& e : entries) {
            if (e.first == key) {
                e.second = value;
                return;
            }
        }
        entries.emplace_back(key, value);
    }

    // Line-oriented key=value; blank lines and # comments are skipped.
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw LibError(SEPSPEC_ERR_DATA, "cannot open config file: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw LibError(SEPSPEC_ERR_ARG,
                               path + ":" + std::to_string(lineno) + ": expected key=value");
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void apply_overrides(const std::vector<std::string>& sets) {
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw LibError(SEPSPEC_ERR_ARG, "--set expects key=value, got '" + kv + "'");
            set(kv.substr(0, eq), kv.substr(eq + 1));
        }
    }

    // Validates every key/value through the library; fails on unknown keys.
    std::unique_ptr<sepspec_config, void (*)(sepspec_config*)> build() const {
        sepspec_config* cfg = nullptr;
        check(sepspec_config_create(&cfg));
        std::unique_ptr<sepspec_config, void (*)(sepspec_config*)> holder(cfg,
                                                                          sepspec_config_destroy);
        for (const auto& [k, v] : entries) check(sepspec_config_set(cfg, k.c_str(), v.c_str()));
        return holder;
    }

    json echo() const {
        json j = json::object();
        for (const auto& [k, v] : entries) j[k] = v;
        return j;
    }
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// One manifest JSON per run, next to the primary output. The timestamp is the
// only field allowed to differ between identical runs.
void write_manifest(const std::string& out_path, const std::string& command, const ConfigBag& cfg,
                    const json& extra, double seconds) {
    json m;
    m["command"] = command;
    m["config"] = cfg.echo();
    m["library_version"] = sepspec_version();
    m["timings"] = {{"total_s", seconds}};
    m["timestamp"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream out(out_path + ".manifest.json");
    out << m.dump(2) << "\n";
}

DatasetHandle load_dataset(const std::string& path) {
    DatasetHandle d;
    check(sepspec_dataset_load_csv(path.c_str(), &d.p));
    return d;
}

ModelHandle load_model(const std::string& path) {
    ModelHandle m;
    check(sepspec_model_load(path.c_str(), &m.p));
    return m;
}

// Writes an n-by-k coordinate block through the dataset CSV writer so every
// numeric file the tool emits shares one format.
void save_matrix_csv(const std::vector<double>& y, std::size_t n, std::size_t k,
                     const std::string& path) {
    DatasetHandle d;
    check(sepspec_dataset_from_arrays(y.data(), n, k, nullptr, &d.p));
    check(sepspec_dataset_save_csv(d.p, path.c_str()));
}

std::vector<double> dataset_rows(const sepspec_dataset* d) {
    std::vector<double> x(sepspec_dataset_n(d) * sepspec_dataset_dim(d));
    check(sepspec_dataset_copy_data(d, x.data()));
    return x;
}

int run(int argc, char** argv) {
    CLI::App app{"Spectral embedding tool: trains networks that approximate "
                 "Laplacian eigenvector embeddings and generalize them to new points"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset CSV");
    std::string g_kind = "moon", g_out;
    std::size_t g_n = 1000, g_ambient = 2;
    double g_noise = 0.05;
    std::uint64_t g_seed = 0;
    int g_step = 0;
    double g_split = 0.0;
    std::uint64_t g_split_seed = 0;
    std::string g_train_out, g_test_out;
    gen->add_option("--kind", g_kind,
                    "moon|two_circles|tangent_spheres|cylinders|line|two_clusters_timeseries");
    gen->add_option("--n", g_n, "Sample count")->required();
    gen->add_option("--ambient", g_ambient, "Ambient dimension");
    gen->add_option("--noise", g_noise, "Noise scale");
    gen->add_option("--seed", g_seed, "Generator seed")->required();
    gen->add_option("--step", g_step, "Time step (two_clusters_timeseries only)");
    gen->add_option("-o,--out", g_out, "Output CSV")->required();
    gen->add_option("--split", g_split, "Also write a train/test split with this train fraction");
    gen->add_option("--split-seed", g_split_seed, "Split permutation seed (defaults to --seed)");
    gen->add_option("--train-out", g_train_out, "Train split CSV (requires --split)");
    gen->add_option("--test-out", g_test_out, "Test split CSV (requires --split)");

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train an embedding network");
    std::string t_data, t_out, t_config;
    std::vector<std::string> t_sets;
    std::uint64_t t_seed = 0;
    train->add_option("--data", t_data, "Training CSV")->required();
    train->add_option("--seed", t_seed, "Training seed")->required();
    train->add_option("--config", t_config, "key=value config file");
    train->add_option("--set", t_sets, "Config override key=value (repeatable)");
    train->add_option("-o,--out", t_out, "Output model JSON")->required();

    // ---- separate ----
    auto* sep = app.add_subcommand("separate", "Recover eigenvector order for a trained model");
    std::string s_model, s_data, s_out;
    sep->add_option("--model", s_model, "Trained model JSON")->required();
    sep->add_option("--data", s_data, "Training CSV (rotation statistic source)")->required();
    sep->add_option("-o,--out", s_out, "Output model JSON (default: overwrite input)");

    // ---- embed ----
    auto* emb = app.add_subcommand("embed", "Embed points with a separated model");
    std::string e_model, e_data, e_out;
    bool e_raw = false;
    emb->add_option("--model", e_model, "Model JSON")->required();
    emb->add_option("--data", e_data, "Points CSV")->required();
    emb->add_flag("--raw", e_raw, "Emit raw network outputs (k+1 columns, no rotation)");
    emb->add_option("-o,--out", e_out, "Output CSV")->required();

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "Score a model against the dense spectral oracle");
    std::string v_model, v_train, v_test, v_out, v_config;
    std::vector<std::string> v_sets;
    ev->add_option("--model", v_model, "Separated model JSON")->required();
    ev->add_option("--train", v_train, "Training CSV")->required();
    ev->add_option("--test", v_test, "Held-out CSV (optional)");
    ev->add_option("--config", v_config, "key=value config file");
    ev->add_option("--set", v_sets, "Config override key=value (repeatable)");
    ev->add_option("-o,--out", v_out, "Output JSON")->required();

    // ---- apps ----
    auto* apps = app.add_subcommand("apps", "Spectral applications");
    apps->require_subcommand(1);
    auto* fied = apps->add_subcommand("fiedler", "Algebraic connectivity and Fiedler vector");
    std::string f_data, f_model, f_variant = "unnormalized", f_out;
    std::size_t f_knn = 20;
    fied->add_option("--data", f_data, "Points CSV")->required();
    fied->add_option("--model", f_model, "Model JSON (network estimate instead of dense path)");
    fied->add_option("--knn", f_knn, "Graph neighbors (dense path)");
    fied->add_option("--variant", f_variant, "unnormalized|symmetric|random_walk (dense path)");
    fied->add_option("-o,--out", f_out, "Output JSON")->required();

    auto* diff = apps->add_subcommand("diffusion", "Diffusion-map coordinates");
    std::string d_data, d_model, d_out;
    std::size_t d_knn = 20, d_k = 2;
    double d_t = 1.0;
    diff->add_option("--data", d_data, "Points CSV")->required();
    diff->add_option("--model", d_model, "Model JSON (network estimate instead of dense path)");
    diff->add_option("--knn", d_knn, "Graph neighbors (dense path)");
    diff->add_option("--k", d_k, "Coordinate count (dense path; model path uses model k)");
    diff->add_option("--t", d_t, "Diffusion time");
    diff->add_option("-o,--out", d_out, "Output CSV")->required();

    // ---- numap ----
    auto* numap = app.add_subcommand("numap", "Generalizable UMAP on spectral initialization");
    numap->require_subcommand(1);
    auto* ntrain = numap->add_subcommand("train", "Train the two-stage embedding");
    std::string nt_data, nt_out, nt_config;
    std::vector<std::string> nt_sets;
    std::uint64_t nt_seed = 0;
    ntrain->add_option("--data", nt_data, "Training CSV")->required();
    ntrain->add_option("--seed", nt_seed, "Training seed")->required();
    ntrain->add_option("--config", nt_config, "key=value config file");
    ntrain->add_option("--set", nt_sets, "Config override key=value (repeatable)");
    ntrain->add_option("-o,--out", nt_out, "Output model JSON")->required();

    auto* nembed = numap->add_subcommand("embed", "Embed points with a trained model");
    std::string ne_model, ne_data, ne_out;
    nembed->add_option("--model", ne_model, "Model JSON")->required();
    nembed->add_option("--data", ne_data, "Points CSV")->required();
    nembed->add_option("-o,--out", ne_out, "Output CSV")->required();

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "Training wall-clock scaling across dataset sizes");
    std::vector<std::size_t> b_sizes = {2000, 8000, 32000};
    std::size_t b_runs = 5, b_cap = 8;
    std::uint64_t b_seed = 0;
    std::string b_out;
    bench->add_option("--sizes", b_sizes, "Dataset sizes");
    bench->add_option("--runs", b_runs, "Training runs per size");
    bench->add_option("--cap-epochs", b_cap,
                      "Epoch cap per run (measures per-epoch cost, not convergence)");
    bench->add_option("--seed", b_seed, "Base seed")->required();
    bench->add_option("-o,--out", b_out, "Output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help prints and exits 0; anything else is a usage error.
        return app.exit(e) == 0 ? 0 : 1;
    }
    const auto t0 = std::chrono::steady_clock::now();

    if (*gen) {
        ConfigBag cfg;
        cfg.set("kind", g_kind);
        cfg.set("n", std::to_string(g_n));
        cfg.set("ambient", std::to_string(g_ambient));
        cfg.set("noise", std::to_string(g_noise));
        cfg.set("seed", std::to_string(g_seed));
        if (g_step != 0) cfg.set("step", std::to_string(g_step));
        DatasetHandle d;
        check(sepspec_dataset_generate(g_kind.c_str(), g_n, g_ambient, g_noise, g_seed, g_step,
                                       &d.p));
        check(sepspec_dataset_save_csv(d.p, g_out.c_str()));
        json extra = {{"rows", g_n}, {"cols", sepspec_dataset_dim(d.p)}};
        if (gen->count("--split") != 0) {
            if (g_train_out.empty() || g_test_out.empty())
                throw LibError(SEPSPEC_ERR_ARG, "--split requires --train-out and --test-out");
            const std::uint64_t ss = gen->count("--split-seed") != 0 ? g_split_seed : g_seed;
            cfg.set("split", std::to_string(g_split));
            cfg.set("split_seed", std::to_string(ss));
            DatasetHandle tr, te;
            check(sepspec_dataset_split(d.p, g_split, ss, &tr.p, &te.p));
            check(sepspec_dataset_save_csv(tr.p, g_train_out.c_str()));
            check(sepspec_dataset_save_csv(te.p, g_test_out.c_str()));
            extra["train_rows"] = sepspec_dataset_n(tr.p);
            extra["test_rows"] = sepspec_dataset_n(te.p);
        }
        write_manifest(g_out, "gen", cfg, extra, elapsed_s(t0));
    } else if (*train) {
        ConfigBag cfg;
        if (!t_config.empty()) cfg.load_file(t_config);
        cfg.apply_overrides(t_sets);
        cfg.set("seed", std::to_string(t_seed));
        auto handle = cfg.build();
        DatasetHandle d = load_dataset(t_data);
        ModelHandle m;
        check(sepspec_train(d.p, handle.get(), &m.p));
        check(sepspec_model_save(m.p, t_out.c_str()));
        std::size_t epochs = 0;
        check(sepspec_model_epochs(m.p, &epochs));
        write_manifest(t_out, "train", cfg, {{"data", t_data}, {"epochs", epochs}}, elapsed_s(t0));
    } else if (*sep) {
        const std::string out = s_out.empty() ? s_model : s_out;
        ModelHandle m = load_model(s_model);
        DatasetHandle d = load_dataset(s_data);
        check(sepspec_separate(m.p, d.p));
        check(sepspec_model_save(m.p, out.c_str()));
        std::vector<double> eigs(sepspec_model_k(m.p));
        check(sepspec_model_eigenvalues(m.p, eigs.data()));
        ConfigBag cfg;
        write_manifest(out, "separate", cfg, {{"model", s_model}, {"data", s_data},
                                              {"eigenvalues", eigs}},
                       elapsed_s(t0));
    } else if (*emb) {
        ModelHandle m = load_model(e_model);
        DatasetHandle d = load_dataset(e_data);
        const std::size_t n = sepspec_dataset_n(d.p), in_dim = sepspec_dataset_dim(d.p);
        const std::size_t out_dim = e_raw ? sepspec_model_k(m.p) + 1 : sepspec_model_k(m.p);
        const std::vector<double> x = dataset_rows(d.p);
        std::vector<double> y(n * out_dim);
        if (e_raw)
            check(sepspec_forward_raw(m.p, x.data(), n, in_dim, y.data()));
        else
            check(sepspec_embed(m.p, x.data(), n, in_dim, y.data()));
        save_matrix_csv(y, n, out_dim, e_out);
        ConfigBag cfg;
        write_manifest(e_out, "embed", cfg,
                       {{"model", e_model}, {"data", e_data}, {"raw", e_raw}, {"rows", n}},
                       elapsed_s(t0));
    } else if (*ev) {
        ConfigBag cfg;
        if (!v_config.empty()) cfg.load_file(v_config);
        cfg.apply_overrides(v_sets);
        auto handle = cfg.build();
        ModelHandle m = load_model(v_model);
        DatasetHandle tr = load_dataset(v_train);
        DatasetHandle te;
        if (!v_test.empty()) te = load_dataset(v_test);
        std::vector<char> buf(1 << 16);
        check(sepspec_evaluate(m.p, tr.p, te.p, handle.get(), buf.data(), buf.size()));
        std::ofstream out(v_out);
        out << buf.data() << "\n";
        std::cout << buf.data() << "\n";
        write_manifest(v_out, "eval", cfg, {{"model", v_model}, {"train", v_train}},
                       elapsed_s(t0));
    } else if (*fied) {
        double value = 0.0;
        std::vector<double> vec;
        ConfigBag cfg;
        if (!f_model.empty()) {
            ModelHandle m = load_model(f_model);
            DatasetHandle d = load_dataset(f_data);
            vec.resize(sepspec_dataset_n(d.p));
            const std::vector<double> x = dataset_rows(d.p);
            check(sepspec_model_fiedler(m.p, x.data(), sepspec_dataset_n(d.p),
                                        sepspec_dataset_dim(d.p), &value, vec.data()));
            cfg.set("model", f_model);
        } else {
            DatasetHandle d = load_dataset(f_data);
            vec.resize(sepspec_dataset_n(d.p));
            check(sepspec_fiedler(d.p, f_knn, f_variant.c_str(), &value, vec.data()));
            cfg.set("knn", std::to_string(f_knn));
            cfg.set("variant", f_variant);
        }
        json out = {{"value", value}, {"vector", vec}};
        std::ofstream file(f_out);
        file << out.dump(2) << "\n";
        std::cout << "fiedler value " << value << "\n";
        write_manifest(f_out, "apps fiedler", cfg, {{"data", f_data}}, elapsed_s(t0));
    } else if (*diff) {
        DatasetHandle d = load_dataset(d_data);
        const std::size_t n = sepspec_dataset_n(d.p);
        ConfigBag cfg;
        cfg.set("t", std::to_string(d_t));
        std::size_t k = d_k;
        std::vector<double> coords;
        if (!d_model.empty()) {
            ModelHandle m = load_model(d_model);
            k = sepspec_model_k(m.p);
            coords.resize(n * k);
            const std::vector<double> x = dataset_rows(d.p);
            check(sepspec_model_diffusion(m.p, x.data(), n, sepspec_dataset_dim(d.p), d_t,
                                          coords.data()));
            cfg.set("model", d_model);
        } else {
            coords.resize(n * k);
            check(sepspec_diffusion(d.p, d_knn, k, d_t, coords.data()));
            cfg.set("knn", std::to_string(d_knn));
            cfg.set("k", std::to_string(d_k));
        }
        save_matrix_csv(coords, n, k, d_out);
        write_manifest(d_out, "apps diffusion", cfg, {{"data", d_data}}, elapsed_s(t0));
    } else if (*ntrain) {
        ConfigBag cfg;
        if (!nt_config.empty()) cfg.load_file(nt_config);
        cfg.apply_overrides(nt_sets);
        cfg.set("seed", std::to_string(nt_seed));
        auto handle = cfg.build();
        DatasetHandle d = load_dataset(nt_data);
        NumapHandle m;
        check(sepspec_numap_train(d.p, handle.get(), &m.p));
        check(sepspec_numap_save(m.p, nt_out.c_str()));
        write_manifest(nt_out, "numap train", cfg, {{"data", nt_data}}, elapsed_s(t0));
    } else if (*nembed) {
        NumapHandle m;
        check(sepspec_numap_load(ne_model.c_str(), &m.p));
        DatasetHandle d = load_dataset(ne_data);
        const std::size_t n = sepspec_dataset_n(d.p), k = sepspec_numap_out_dim(m.p);
        const std::vector<double> x = dataset_rows(d.p);
        std::vector<double> y(n * k);
        check(sepspec_numap_embed(m.p, x.data(), n, sepspec_dataset_dim(d.p), y.data()));
        save_matrix_csv(y, n, k, ne_out);
        ConfigBag cfg;
        write_manifest(ne_out, "numap embed", cfg, {{"model", ne_model}, {"data", ne_data}},
                       elapsed_s(t0));
    } else if (*bench) {
        ConfigBag cfg;
        cfg.set("seed", std::to_string(b_seed));
        cfg.set("cap_epochs", std::to_string(b_cap));
        json per_n = json::array();
        for (const std::size_t n : b_sizes) {
            DatasetHandle d;
            check(sepspec_dataset_generate("moon", n, 10, 0.05, b_seed, 0, &d.p));
            std::vector<double> secs;
            for (std::size_t r = 0; r < b_runs; ++r) {
                ConfigBag run_cfg;
                run_cfg.set("max_epochs", std::to_string(b_cap));
                run_cfg.set("seed", std::to_string(b_seed + r));
                auto handle = run_cfg.build();
                const auto r0 = std::chrono::steady_clock::now();
                ModelHandle m;
                check(sepspec_train(d.p, handle.get(), &m.p));
                secs.push_back(elapsed_s(r0));
            }
            double mean = 0.0;
            for (double s : secs) mean += s;
            mean /= static_cast<double>(secs.size());
            double var = 0.0;
            for (double s : secs) var += (s - mean) * (s - mean);
            const double stddev = std::sqrt(var / static_cast<double>(secs.size()));
            const double per_sample_ms = 1e3 * mean / static_cast<double>(n);
            per_n.push_back({{"n", n},
                             {"mean_s", mean},
                             {"std_s", stddev},
                             {"per_sample_ms", per_sample_ms}});
            std::cout << "n=" << n << " mean " << mean << " s, " << per_sample_ms
                      << " ms/sample\n";
        }
        json out = {{"sizes", b_sizes}, {"runs", b_runs}, {"cap_epochs", b_cap},
                    {"per_n", per_n}};
        std::ofstream file(b_out);
        file << out.dump(2) << "\n";
        write_manifest(b_out, "bench", cfg, json::object(), elapsed_s(t0));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const LibError& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.status) {
            case SEPSPEC_ERR_DATA: return 2;
            case SEPSPEC_ERR_NUMERIC: return 3;
            default: return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
