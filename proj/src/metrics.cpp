#include "sepspec/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "sepspec/error.hpp"

namespace sepspec {

double sin2_distance(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size() || u.empty()) throw std::invalid_argument("sin2_distance: length mismatch");
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("sin2_distance: zero vector");
    const double cos2 = std::clamp((uv * uv) / (uu * vv), 0.0, 1.0);
    return 1.0 - cos2;
}

double grassmann_distance(const Matrix& a, const Matrix& b) {
    const std::vector<double> angles = principal_angles(a, b);
    double acc = 0.0;
    for (double t : angles) {
        const double s = std::sin(t);
        acc += s * s;
    }
    return acc;
}

GsReport grassmann_score(const Matrix& x, const Matrix& y, const GsConfig& cfg) {
    if (x.rows() != y.rows()) throw std::invalid_argument("grassmann_score: row counts differ");
    if (cfg.t_vecs == 0) throw std::invalid_argument("grassmann_score: t_vecs must be positive");
    if (cfg.neighbors + 1 > x.rows()) {
        throw std::invalid_argument("grassmann_score: neighbors must be below the point count");
    }

    GsReport out;
    auto basis = [&](const Matrix& pts, std::size_t& comps) {
        const SparseAffinity aff = affinity(knn(pts, cfg.neighbors));
        comps = component_count(aff);
        const Laplacian lap = laplacian(aff, LaplacianVariant::unnormalized);
        return spectral_oracle(lap, cfg.t_vecs, /*includes_trivial=*/true).vectors;
    };
    const Matrix bx = basis(x, out.x_components);
    const Matrix by = basis(y, out.y_components);
    out.score = grassmann_distance(bx, by);
    return out;
}

double knn_accuracy(const Matrix& train_y, const std::vector<std::int32_t>& train_labels,
                    const Matrix& eval_y, const std::vector<std::int32_t>& eval_labels,
                    std::size_t k) {
    const std::size_t n_train = train_y.rows(), n_eval = eval_y.rows();
    if (train_labels.size() != n_train || eval_labels.size() != n_eval) {
        throw std::invalid_argument("knn_accuracy: label count mismatch");
    }
    if (train_y.cols() != eval_y.cols()) throw std::invalid_argument("knn_accuracy: width mismatch");
    if (n_eval == 0) throw std::invalid_argument("knn_accuracy: empty eval set");

    // Self-evaluation: same shape and identical contents excludes row i from
    // its own neighborhood.
    bool self_eval = n_train == n_eval && train_y.cols() == eval_y.cols();
    if (self_eval) {
        self_eval = std::equal(train_y.data(), train_y.data() + train_y.size(), eval_y.data());
    }
    if (k == 0 || k > n_train - (self_eval ? 1 : 0)) {
        throw std::invalid_argument("knn_accuracy: k out of range");
    }

    const std::size_t d = train_y.cols();
    std::vector<std::pair<double, std::uint32_t>> best;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n_eval; ++i) {
        const double* pi = eval_y.row(i);
        best.clear();
        for (std::size_t j = 0; j < n_train; ++j) {
            if (self_eval && j == i) continue;
            const double* pj = train_y.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = pi[c] - pj[c];
                s += diff * diff;
            }
            best.emplace_back(s, static_cast<std::uint32_t>(j));
        }
        std::partial_sort(best.begin(), best.begin() + k, best.end());
        std::map<std::int32_t, std::size_t> votes;
        for (std::size_t j = 0; j < k; ++j) ++votes[train_labels[best[j].second]];
        std::int32_t winner = votes.begin()->first;
        std::size_t top = votes.begin()->second;
        for (const auto& [label, count] : votes) {
            if (count > top) {
                top = count;
                winner = label;  // ties keep the smaller label (map order)
            }
        }
        if (winner == eval_labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_eval);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: need two equal-length vectors");
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        num += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) throw std::invalid_argument("pearson: constant input");
    return num / std::sqrt(va * vb);
}

std::vector<std::size_t> best_assignment(const Matrix& cost) {
    const std::size_t rows = cost.rows(), cols = cost.cols();
    if (rows == 0 || rows > cols) throw std::invalid_argument("best_assignment: need 0 < rows <= cols");
    if (cols > 20) throw std::invalid_argument("best_assignment: too many columns");

    // Exact bitmask DP over used columns.
    const std::size_t masks = std::size_t(1) << cols;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(masks, inf);
    std::vector<std::int8_t> choice(masks * rows, -1);
    dp[0] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> next(masks, inf);
        for (std::size_t mask = 0; mask < masks; ++mask) {
            if (dp[mask] == inf || std::popcount(mask) != static_cast<int>(i)) continue;
            for (std::size_t c = 0; c < cols; ++c) {
                if (mask & (std::size_t(1) << c)) continue;
                const std::size_t to = mask | (std::size_t(1) << c);
                const double v = dp[mask] + cost(i, c);
                if (v < next[to]) {
                    next[to] = v;
                    choice[to * rows + i] = static_cast<std::int8_t>(c);
                }
            }
        }
        dp = std::move(next);
    }
    std::size_t best_mask = 0;
    double best_v = inf;
    for (std::size_t mask = 0; mask < masks; ++mask) {
        if (std::popcount(mask) == static_cast<int>(rows) && dp[mask] < best_v) {
            best_v = dp[mask];
            best_mask = mask;
        }
    }
    std::vector<std::size_t> assign(rows);
    std::size_t mask = best_mask;
    for (std::size_t i = rows; i-- > 0;) {
        const std::int8_t c = choice[mask * rows + i];
        assign[i] = static_cast<std::size_t>(c);
        mask &= ~(std::size_t(1) << c);
    }
    return assign;
}

namespace {

constexpr double kDegenerateGap = 1e-6;

}  // namespace

std::vector<double> per_vector_sin2(const Matrix& embedding, const SpectralResult& oracle) {
    const std::size_t k = oracle.vectors.cols();
    if (embedding.cols() != k) throw std::invalid_argument("per_vector_sin2: column count mismatch");
    if (embedding.rows() != oracle.vectors.rows()) {
        throw std::invalid_argument("per_vector_sin2: row count mismatch");
    }

    std::vector<double> out(k, 0.0);
    std::size_t start = 0;
    while (start < k) {
        // Extend the group while consecutive oracle eigenvalues nearly tie.
        std::size_t end = start + 1;
        while (end < k && oracle.values[end] - oracle.values[end - 1] < kDegenerateGap) ++end;
        const std::size_t width = end - start;
        if (width == 1) {
            out[start] = sin2_distance(embedding.col(start), oracle.vectors.col(start));
        } else {
            Matrix cost(width, width);
            for (std::size_t i = 0; i < width; ++i) {
                const auto ocol = oracle.vectors.col(start + i);
                for (std::size_t j = 0; j < width; ++j) {
                    cost(i, j) = sin2_distance(embedding.col(start + j), ocol);
                }
            }
            const std::vector<std::size_t> assign = best_assignment(cost);
            for (std::size_t i = 0; i < width; ++i) out[start + i] = cost(i, assign[i]);
        }
        start = end;
    }
    return out;
}

std::vector<double> resorted_sin2(const Matrix& candidates, const Matrix& oracle_cols) {
    const std::size_t k = oracle_cols.cols();
    if (candidates.cols() < k) throw std::invalid_argument("resorted_sin2: too few candidate columns");
    if (candidates.rows() != oracle_cols.rows()) {
        throw std::invalid_argument("resorted_sin2: row count mismatch");
    }
    Matrix cost(k, candidates.cols());
    for (std::size_t i = 0; i < k; ++i) {
        const auto ocol = oracle_cols.col(i);
        for (std::size_t j = 0; j < candidates.cols(); ++j) {
            cost(i, j) = sin2_distance(candidates.col(j), ocol);
        }
    }
    const std::vector<std::size_t> assign = best_assignment(cost);
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = cost(i, assign[i]);
    return out;
}

EvalReport evaluate_model(const SepSpectralModel& model, const Dataset& train,
                          const Dataset* test, const EvalConfig& cfg) {
    if (!model.separated()) throw std::invalid_argument("evaluate_model: model has no recovered rotation");
    const std::size_t k = model.embed_dim();

    const Dataset combined = test ? concat(train, *test) : train;
    const std::size_t eval_lo = test ? train.n() : 0;
    const std::size_t eval_n = test ? test->n() : train.n();

    const Laplacian lap =
        laplacian(affinity(knn(combined.samples, cfg.oracle_knn)), cfg.oracle_variant);
    const SpectralResult oracle = spectral_oracle(lap, k, /*includes_trivial=*/false);

    // Oracle columns restricted to the evaluated rows.
    SpectralResult oracle_rows = oracle;
    oracle_rows.vectors.resize(eval_n, k);
    for (std::size_t r = 0; r < eval_n; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            oracle_rows.vectors(r, c) = oracle.vectors(eval_lo + r, c);
        }
    }

    const Matrix& eval_x = test ? test->samples : train.samples;
    const Matrix emb = embed(model, eval_x);

    EvalReport out;
    out.sin2_per_vector = per_vector_sin2(emb, oracle_rows);
    out.grassmann = grassmann_distance(emb, oracle_rows.vectors);
    out.gs = grassmann_score(eval_x, emb,
                             GsConfig{cfg.gs_t_vecs, cfg.gs_neighbors})
                 .score;
    out.pearson_eigs = pearson(model.eigenvalues, oracle.values);
    out.oracle_gap_degenerate = oracle.boundary_gap_degenerate;

    if (train.has_labels() && (!test || test->has_labels())) {
        const Matrix train_emb = test ? embed(model, train.samples) : emb;
        const std::vector<std::int32_t>& eval_labels = test ? test->labels : train.labels;
        out.knn_acc = knn_accuracy(train_emb, train.labels, emb, eval_labels, cfg.knn_k);
    }
    return out;
}

std::string eval_report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["sin2_per_vector"] = r.sin2_per_vector;
    j["grassmann"] = r.grassmann;
    j["gs"] = r.gs;
    if (r.knn_acc) {
        j["knn_acc"] = *r.knn_acc;
    } else {
        j["knn_acc"] = nullptr;
    }
    j["pearson_eigs"] = r.pearson_eigs;
    j["oracle_gap_degenerate"] = r.oracle_gap_degenerate;
    return j.dump(2);
}

}  // namespace sepspec
