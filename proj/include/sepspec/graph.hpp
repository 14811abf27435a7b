#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "sepspec/matrix.hpp"

namespace sepspec {

// k nearest neighbors per row, sorted by ascending distance with exact ties
// broken by the smaller index. Row i never contains i itself.
struct NeighborLists {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;  // n*k, row-major
    std::vector<double> distances;       // n*k, Euclidean

    std::uint32_t index(std::size_t i, std::size_t j) const { return indices[i * k + j]; }
    double distance(std::size_t i, std::size_t j) const { return distances[i * k + j]; }
};

// Symmetric sparse affinity in CSR form. Weights lie in (0, 1], the diagonal
// is zero, and (i, j) is stored iff (j, i) is stored with the same weight.
struct SparseAffinity {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;    // n+1
    std::vector<std::uint32_t> col_idx;
    std::vector<double> weights;

    std::size_t nnz() const { return col_idx.size(); }
    // Weight at (i, j), or 0 when the edge is absent.
    double at(std::size_t i, std::size_t j) const;
};

enum class LaplacianVariant { unnormalized, symmetric, random_walk };

const char* variant_name(LaplacianVariant v);
LaplacianVariant variant_from_name(const std::string& name);

// Graph Laplacian held as the affinity plus degrees; rows are materialized on
// demand either densely or through matvec, so no variant-specific storage is
// kept. Zero-degree vertices contribute zero rows under the normalized
// variants.
struct Laplacian {
    SparseAffinity affinity;
    std::vector<double> degrees;
    LaplacianVariant variant = LaplacianVariant::unnormalized;

    std::size_t n() const { return affinity.n; }

    // Y <- L * X for the stored variant. X is n-by-c.
    void apply(const Matrix& x, Matrix& y) const;

    // Dense n-by-n materialization. Guarded to n <= 5000.
    Matrix dense() const;
};

// Exact brute-force kNN under the Euclidean metric. Requires k < n.
NeighborLists knn(const Matrix& points, std::size_t k);

// Per-vertex adaptive kernel weights before symmetrization: row i holds
// exp((rho_i - dist(i, j)) / sigma_i) for each neighbor j in its list, where
// rho_i is the nearest-neighbor distance and sigma_i the median neighbor
// distance (mean of the two central values for even k, floored at 1e-12).
// Layout matches the NeighborLists.
std::vector<double> affinity_directed(const NeighborLists& nb);

// Symmetrized affinity W = (W_dir + W_dir^T) / 2 from the directed weights.
SparseAffinity affinity(const NeighborLists& nb);

// Affinity from an explicit undirected edge list; each (i, j, w) pair with
// i != j and w in (0, 1] is stored in both directions. Duplicate edges are an
// error.
SparseAffinity affinity_from_edges(std::size_t n,
                                   const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges);

Laplacian laplacian(SparseAffinity affinity, LaplacianVariant variant);

// Connected components of the affinity graph (vertex -> component id,
// components numbered by first appearance).
std::vector<std::uint32_t> components(const SparseAffinity& a);

std::size_t component_count(const SparseAffinity& a);

// Edge-list CSV persistence: header "i,j,w", one row per undirected edge with
// i < j. Loading reconstructs the symmetric structure.
void save_affinity_csv(const SparseAffinity& a, const std::string& path);
SparseAffinity load_affinity_csv(const std::string& path);

}  // namespace sepspec
