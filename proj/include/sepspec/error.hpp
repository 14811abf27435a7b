#pragma once

#include <stdexcept>
#include <string>

namespace sepspec {

// Input data that cannot be used: unreadable files, malformed CSV, shape
// mismatches between datasets and models.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: non-finite losses, eigensolver non-convergence,
// asymmetric input where symmetry is required.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rank-deficient factorization target. Kept separate from NumericError so the
// training loop can retry the orthogonalization step with a fresh batch.
struct RankDeficientError : NumericError {
    explicit RankDeficientError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace sepspec
