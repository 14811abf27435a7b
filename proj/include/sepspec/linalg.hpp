#pragma once

#include <cstddef>
#include <vector>

#include "sepspec/graph.hpp"
#include "sepspec/matrix.hpp"

namespace sepspec {

struct EigResult {
    std::vector<double> values;  // ascending
    Matrix vectors;              // n-by-n, column i pairs with values[i]
};

// Full eigendecomposition of a symmetric matrix: Householder reduction to
// tridiagonal form followed by QL iteration with implicit shifts. The input
// must be symmetric within 1e-8 relative to its largest entry; it is averaged
// with its transpose before factorization. Each eigenvector column is
// normalized with its largest-magnitude entry positive (first such entry on
// ties).
EigResult eig_sym(const Matrix& m);

struct QrResult {
    Matrix q;  // m-by-p, orthonormal columns (empty when want_q is false)
    Matrix r;  // p-by-p upper triangular with positive diagonal
};

// Thin Householder QR of an m-by-p matrix, m >= p. Throws RankDeficientError
// when a diagonal entry of R falls below 1e-12 * ||A||_F.
QrResult qr(const Matrix& a, bool want_q = true);

// Solves R * X = B for upper-triangular R by back substitution.
Matrix solve_upper(const Matrix& r, const Matrix& b);

// Principal angles between the column spans of A and B (both n-by-k_a and
// n-by-k_b), ascending, in [0, pi/2]. Inputs whose Gram matrix deviates from
// the identity by more than 1e-6 are re-orthonormalized internally.
std::vector<double> principal_angles(const Matrix& a, const Matrix& b);

// Leading spectral basis of a graph Laplacian, computed densely (n <= 5000).
struct SpectralResult {
    Matrix vectors;              // n-by-k, sign-fixed columns
    std::vector<double> values;  // ascending, clamped to be nonnegative
    LaplacianVariant variant = LaplacianVariant::unnormalized;
    bool includes_trivial = false;
    // Spectral gap at the cut between kept and discarded eigenvalues; a gap
    // below 1e-10 makes the returned basis non-unique.
    double boundary_gap = 0.0;
    bool boundary_gap_degenerate = false;
};

// First k eigenpairs of the Laplacian. With includes_trivial = false the
// leading (constant-direction) pair is dropped and pairs 2..k+1 are returned;
// with true, pairs 1..k. Random-walk Laplacians are solved through their
// symmetric similarity transform, so the returned vectors satisfy
// L_rw v = lambda v with unit-normalized columns. Eigenvalues below -1e-8
// (relative to the spectral scale) raise NumericError; small negatives are
// clamped to zero.
SpectralResult spectral_oracle(const Laplacian& lap, std::size_t k, bool includes_trivial = false);

}  // namespace sepspec
