#pragma once

#include <cstddef>
#include <vector>

#include "sepspec/graph.hpp"
#include "sepspec/matrix.hpp"
#include "sepspec/specnet.hpp"

namespace sepspec {

// Second-smallest Laplacian eigenpair. The value (algebraic connectivity) is
// zero exactly when the graph is disconnected; the vector's sign pattern
// splits the graph across its sparsest cut.
struct FiedlerResult {
    std::vector<double> vector;  // unit norm, largest-magnitude entry positive
    double value = 0.0;
};

// Dense reference on an explicit Laplacian.
FiedlerResult fiedler(const Laplacian& lap);

// Network estimate: the first embedding column (unit-normalized, sign-fixed)
// with its recovered eigenvalue.
FiedlerResult fiedler(const SepSpectralModel& model, const Matrix& points);

// Diffusion-map coordinates: column i is (1 - lambda_{i+1})^t v_{i+1} from
// the random-walk Laplacian spectrum, so fast-mixing directions shrink as
// the diffusion time t grows. Random-walk eigenvalues live in [0, 2] for a
// proper affinity graph; anything outside is clipped and flagged.
struct DiffusionResult {
    Matrix coords;              // n x k
    std::vector<double> decay;  // per-column (1 - lambda)^t factors
    bool clipped = false;       // an eigenvalue fell outside [0, 2]
};

// Dense reference on an affinity graph; the trivial pair is skipped.
DiffusionResult diffusion_map(const SparseAffinity& aff, std::size_t k, double t);

// Network estimate from the embedding columns and recovered eigenvalues.
// Columns keep the network's output scale; the per-column decay factors are
// the same ones the dense path would apply.
DiffusionResult diffusion_map(const SepSpectralModel& model, const Matrix& points, double t);

}  // namespace sepspec
