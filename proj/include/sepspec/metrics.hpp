#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepspec/linalg.hpp"
#include "sepspec/matrix.hpp"
#include "sepspec/specnet.hpp"

namespace sepspec {

// Squared sine of the angle between two nonzero vectors; sign-invariant,
// 0 for parallel and 1 for orthogonal inputs.
double sin2_distance(const std::vector<double>& u, const std::vector<double>& v);

// Sum of squared principal-angle sines between the column spans; inputs are
// re-orthonormalized internally. Zero iff the spans coincide.
double grassmann_distance(const Matrix& a, const Matrix& b);

struct GsConfig {
    std::size_t t_vecs = 2;      // compared spectral basis size, trivial pair included
    std::size_t neighbors = 50;  // kNN width for both graphs
};

struct GsReport {
    double score = 0.0;
    std::size_t x_components = 1;  // connected components of the two graphs;
    std::size_t y_components = 1;  // anything above 1 makes the basis non-unique
};

// Structural faithfulness of an embedding Y of the points X: the Grassmann
// distance between the leading t_vecs eigenvectors of the two unnormalized
// graph Laplacians. Lower is better; 0 means identical leading spectral
// structure.
GsReport grassmann_score(const Matrix& x, const Matrix& y, const GsConfig& cfg = {});

// Majority-vote kNN classification accuracy of eval points against a labeled
// reference set. Neighbor ties break on the smaller index, vote ties on the
// smaller label. When eval is the reference set itself (same contents), each
// point's own row is excluded.
double knn_accuracy(const Matrix& train_y, const std::vector<std::int32_t>& train_labels,
                    const Matrix& eval_y, const std::vector<std::int32_t>& eval_labels,
                    std::size_t k);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Minimum-cost assignment of each row to a distinct column (rows <= cols),
// exact over all injections. cost is rows-by-cols.
std::vector<std::size_t> best_assignment(const Matrix& cost);

// Per-column sin^2 between embedding columns and oracle columns. Columns are
// matched one-to-one; within groups of near-degenerate oracle eigenvalues
// (gap < 1e-6) the matching minimizes the group's total sin^2, elsewhere it
// is the identity.
std::vector<double> per_vector_sin2(const Matrix& embedding, const SpectralResult& oracle);

// Best per-oracle-column sin^2 achievable by assigning k distinct columns of
// a wider candidate matrix (used to grade un-rotated network outputs as
// favorably as possible).
std::vector<double> resorted_sin2(const Matrix& candidates, const Matrix& oracle_cols);

struct EvalConfig {
    std::size_t oracle_knn = 20;  // graph width for the reference embedding
    std::size_t gs_t_vecs = 2;
    std::size_t gs_neighbors = 50;
    std::size_t knn_k = 5;
    LaplacianVariant oracle_variant = LaplacianVariant::unnormalized;
};

struct EvalReport {
    std::vector<double> sin2_per_vector;
    double grassmann = 0.0;
    double gs = 0.0;
    std::optional<double> knn_acc;  // absent without labels
    double pearson_eigs = 0.0;
    bool oracle_gap_degenerate = false;
};

// Scores a separated model against the dense spectral reference. With a test
// set, the reference basis is computed on train and test combined and the
// test rows are compared; without one, the model is scored on the train set
// itself.
EvalReport evaluate_model(const SepSpectralModel& model, const Dataset& train,
                          const Dataset* test, const EvalConfig& cfg);

std::string eval_report_to_json(const EvalReport& r);

}  // namespace sepspec
