#include "sepspec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sepspec/error.hpp"

namespace sepspec {

namespace {

constexpr double kSigmaFloor = 1e-12;

struct Candidate {
    double dist2;
    std::uint32_t idx;
};

// Worse means "evicted first" from the k-best heap: larger distance, or the
// larger index on an exact tie.
bool worse(const Candidate& a, const Candidate& b) {
    if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
    return a.idx < b.idx;
}

}  // namespace

double SparseAffinity::at(std::size_t i, std::size_t j) const {
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
        if (col_idx[p] == j) return weights[p];
    }
    return 0.0;
}

const char* variant_name(LaplacianVariant v) {
    switch (v) {
        case LaplacianVariant::unnormalized: return "unnormalized";
        case LaplacianVariant::symmetric: return "symmetric";
        case LaplacianVariant::random_walk: return "random_walk";
    }
    return "unknown";
}

LaplacianVariant variant_from_name(const std::string& name) {
    if (name == "unnormalized") return LaplacianVariant::unnormalized;
    if (name == "symmetric") return LaplacianVariant::symmetric;
    if (name == "random_walk") return LaplacianVariant::random_walk;
    throw std::invalid_argument("unknown Laplacian variant: " + name);
}

NeighborLists knn(const Matrix& points, std::size_t k) {
    const std::size_t n = points.rows(), d = points.cols();
    if (n == 0) throw std::invalid_argument("knn: empty point set");
    if (k == 0 || k >= n) throw std::invalid_argument("knn: need 0 < k < n");

    NeighborLists out;
    out.n = n;
    out.k = k;
    out.indices.resize(n * k);
    out.distances.resize(n * k);

    std::vector<Candidate> heap;
    heap.reserve(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double* pi = points.row(i);
        heap.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* pj = points.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = pi[c] - pj[c];
                s += diff * diff;
            }
            Candidate cand{s, static_cast<std::uint32_t>(j)};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), worse);
            } else if (worse(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), worse);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), worse);
            }
        }
        std::sort(heap.begin(), heap.end(), [](const Candidate& a, const Candidate& b) {
            if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
            return a.idx < b.idx;
        });
        for (std::size_t j = 0; j < k; ++j) {
            out.indices[i * k + j] = heap[j].idx;
            out.distances[i * k + j] = std::sqrt(heap[j].dist2);
        }
    }
    return out;
}

std::vector<double> affinity_directed(const NeighborLists& nb) {
    std::vector<double> w(nb.n * nb.k);
    std::vector<double> sorted(nb.k);
    for (std::size_t i = 0; i < nb.n; ++i) {
        const double* di = nb.distances.data() + i * nb.k;
        const double rho = di[0];  // neighbor lists are distance-sorted
        std::copy(di, di + nb.k, sorted.begin());
        // Lists arrive sorted, so the median reads off directly.
        double sigma;
        if (nb.k % 2 == 1) {
            sigma = sorted[nb.k / 2];
        } else {
            sigma = 0.5 * (sorted[nb.k / 2 - 1] + sorted[nb.k / 2]);
        }
        sigma = std::max(sigma, kSigmaFloor);
        for (std::size_t j = 0; j < nb.k; ++j) {
            w[i * nb.k + j] = std::exp((rho - di[j]) / sigma);
        }
    }
    return w;
}

namespace {

SparseAffinity build_csr(std::size_t n, std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& coo) {
    std::sort(coo.begin(), coo.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    SparseAffinity out;
    out.n = n;
    out.row_ptr.assign(n + 1, 0);
    out.col_idx.reserve(coo.size());
    out.weights.reserve(coo.size());
    std::vector<std::uint32_t> rows;
    rows.reserve(coo.size());
    std::size_t p = 0;
    while (p < coo.size()) {
        const std::uint32_t r = std::get<0>(coo[p]);
        const std::uint32_t c = std::get<1>(coo[p]);
        double w = std::get<2>(coo[p]);
        // Merge the two directed contributions of a mutual edge.
        while (p + 1 < coo.size() && std::get<0>(coo[p + 1]) == r && std::get<1>(coo[p + 1]) == c) {
            w += std::get<2>(coo[p + 1]);
            ++p;
        }
        rows.push_back(r);
        out.col_idx.push_back(c);
        out.weights.push_back(w);
        ++p;
    }
    for (std::uint32_t r : rows) ++out.row_ptr[r + 1];
    for (std::size_t r = 0; r < n; ++r) out.row_ptr[r + 1] += out.row_ptr[r];
    return out;
}

}  // namespace

SparseAffinity affinity(const NeighborLists& nb) {
    const std::vector<double> dir = affinity_directed(nb);
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> coo;
    coo.reserve(2 * nb.n * nb.k);
    for (std::size_t i = 0; i < nb.n; ++i) {
        for (std::size_t j = 0; j < nb.k; ++j) {
            const std::uint32_t tgt = nb.indices[i * nb.k + j];
            const double half = 0.5 * dir[i * nb.k + j];
            coo.emplace_back(static_cast<std::uint32_t>(i), tgt, half);
            coo.emplace_back(tgt, static_cast<std::uint32_t>(i), half);
        }
    }
    return build_csr(nb.n, coo);
}

SparseAffinity affinity_from_edges(
    std::size_t n, const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges) {
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> coo;
    coo.reserve(2 * edges.size());
    for (const auto& [i, j, w] : edges) {
        if (i >= n || j >= n) throw std::invalid_argument("affinity_from_edges: vertex out of range");
        if (i == j) throw std::invalid_argument("affinity_from_edges: self-loop");
        if (!(w > 0.0) || w > 1.0) throw std::invalid_argument("affinity_from_edges: weight outside (0, 1]");
        coo.emplace_back(i, j, w);
        coo.emplace_back(j, i, w);
    }
    std::sort(coo.begin(), coo.end());
    for (std::size_t p = 1; p < coo.size(); ++p) {
        if (std::get<0>(coo[p]) == std::get<0>(coo[p - 1]) && std::get<1>(coo[p]) == std::get<1>(coo[p - 1])) {
            throw std::invalid_argument("affinity_from_edges: duplicate edge");
        }
    }
    return build_csr(n, coo);
}

void Laplacian::apply(const Matrix& x, Matrix& y) const {
    const std::size_t nn = n(), c = x.cols();
    if (x.rows() != nn) throw std::invalid_argument("Laplacian::apply: row count mismatch");
    y.resize(nn, c);
    // W * x first, then combine with degrees per variant.
    for (std::size_t i = 0; i < nn; ++i) {
        double* yi = y.row(i);
        for (std::size_t p = affinity.row_ptr[i]; p < affinity.row_ptr[i + 1]; ++p) {
            const double w = affinity.weights[p];
            const double* xj = x.row(affinity.col_idx[p]);
            for (std::size_t t = 0; t < c; ++t) yi[t] += w * xj[t];
        }
    }
    switch (variant) {
        case LaplacianVariant::unnormalized:
            for (std::size_t i = 0; i < nn; ++i) {
                const double d = degrees[i];
                double* yi = y.row(i);
                const double* xi = x.row(i);
                for (std::size_t t = 0; t < c; ++t) yi[t] = d * xi[t] - yi[t];
            }
            break;
        case LaplacianVariant::random_walk:
            for (std::size_t i = 0; i < nn; ++i) {
                const double dinv = degrees[i] > 0.0 ? 1.0 / degrees[i] : 0.0;
                double* yi = y.row(i);
                const double* xi = x.row(i);
                for (std::size_t t = 0; t < c; ++t) {
                    yi[t] = degrees[i] > 0.0 ? xi[t] - dinv * yi[t] : 0.0;
                }
            }
            break;
        case LaplacianVariant::symmetric: {
            // L_sym x = x - D^-1/2 W D^-1/2 x; the W x above used raw x, so
            // recompute with scaled input instead.
            Matrix xs = x;
            for (std::size_t i = 0; i < nn; ++i) {
                const double s = degrees[i] > 0.0 ? 1.0 / std::sqrt(degrees[i]) : 0.0;
                double* r = xs.row(i);
                for (std::size_t t = 0; t < c; ++t) r[t] *= s;
            }
            y.fill(0.0);
            for (std::size_t i = 0; i < nn; ++i) {
                double* yi = y.row(i);
                for (std::size_t p = affinity.row_ptr[i]; p < affinity.row_ptr[i + 1]; ++p) {
                    const double w = affinity.weights[p];
                    const double* xj = xs.row(affinity.col_idx[p]);
                    for (std::size_t t = 0; t < c; ++t) yi[t] += w * xj[t];
                }
            }
            for (std::size_t i = 0; i < nn; ++i) {
                const double s = degrees[i] > 0.0 ? 1.0 / std::sqrt(degrees[i]) : 0.0;
                double* yi = y.row(i);
                const double* xi = x.row(i);
                for (std::size_t t = 0; t < c; ++t) {
                    yi[t] = degrees[i] > 0.0 ? xi[t] - s * yi[t] : 0.0;
                }
            }
            break;
        }
    }
}

Matrix Laplacian::dense() const {
    const std::size_t nn = n();
    if (nn > 5000) throw std::invalid_argument("Laplacian::dense: guarded to n <= 5000");
    Matrix l(nn, nn);
    for (std::size_t i = 0; i < nn; ++i) {
        for (std::size_t p = affinity.row_ptr[i]; p < affinity.row_ptr[i + 1]; ++p) {
            l(i, affinity.col_idx[p]) = -affinity.weights[p];
        }
        l(i, i) = degrees[i];
    }
    switch (variant) {
        case LaplacianVariant::unnormalized:
            break;
        case LaplacianVariant::random_walk:
            for (std::size_t i = 0; i < nn; ++i) {
                const double dinv = degrees[i] > 0.0 ? 1.0 / degrees[i] : 0.0;
                double* r = l.row(i);
                for (std::size_t j = 0; j < nn; ++j) r[j] *= dinv;
            }
            break;
        case LaplacianVariant::symmetric:
            for (std::size_t i = 0; i < nn; ++i) {
                const double si = degrees[i] > 0.0 ? 1.0 / std::sqrt(degrees[i]) : 0.0;
                double* r = l.row(i);
                for (std::size_t j = 0; j < nn; ++j) {
                    const double sj = degrees[j] > 0.0 ? 1.0 / std::sqrt(degrees[j]) : 0.0;
                    r[j] *= si * sj;
                }
            }
            break;
    }
    return l;
}

Laplacian laplacian(SparseAffinity aff, LaplacianVariant variant) {
    Laplacian lap;
    lap.degrees.assign(aff.n, 0.0);
    for (std::size_t i = 0; i < aff.n; ++i) {
        double d = 0.0;
        for (std::size_t p = aff.row_ptr[i]; p < aff.row_ptr[i + 1]; ++p) d += aff.weights[p];
        lap.degrees[i] = d;
    }
    lap.affinity = std::move(aff);
    lap.variant = variant;
    return lap;
}

std::vector<std::uint32_t> components(const SparseAffinity& a) {
    std::vector<std::uint32_t> comp(a.n, UINT32_MAX);
    std::vector<std::uint32_t> stack;
    std::uint32_t next = 0;
    for (std::size_t s = 0; s < a.n; ++s) {
        if (comp[s] != UINT32_MAX) continue;
        comp[s] = next;
        stack.push_back(static_cast<std::uint32_t>(s));
        while (!stack.empty()) {
            const std::uint32_t v = stack.back();
            stack.pop_back();
            for (std::size_t p = a.row_ptr[v]; p < a.row_ptr[v + 1]; ++p) {
                const std::uint32_t u = a.col_idx[p];
                if (comp[u] == UINT32_MAX) {
                    comp[u] = next;
                    stack.push_back(u);
                }
            }
        }
        ++next;
    }
    return comp;
}

std::size_t component_count(const SparseAffinity& a) {
    const auto comp = components(a);
    std::uint32_t best = 0;
    for (std::uint32_t c : comp) best = std::max(best, c);
    return a.n == 0 ? 0 : best + 1;
}

void save_affinity_csv(const SparseAffinity& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "i,j,w\n";
    char buf[64];
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const std::uint32_t j = a.col_idx[p];
            if (j <= i) continue;  // one row per undirected edge
            std::snprintf(buf, sizeof buf, "%zu,%u,%.17g\n", i, j, a.weights[p]);
            out << buf;
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

SparseAffinity load_affinity_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty affinity file: " + path);
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
    std::size_t n = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::uint32_t i, j;
        double w;
        if (std::sscanf(line.c_str(), "%u,%u,%lf", &i, &j, &w) != 3) {
            throw DataError(path + ": parse error at line " + std::to_string(lineno));
        }
        edges.emplace_back(i, j, w);
        n = std::max<std::size_t>(n, std::max(i, j) + 1);
    }
    return affinity_from_edges(n, edges);
}

}  // namespace sepspec
