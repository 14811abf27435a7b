#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepspec/matrix.hpp"

namespace sepspec {

struct Dataset {
    Matrix samples;                   // n-by-d, all entries finite
    std::vector<std::int32_t> labels; // empty, or one label per row
    std::string name;

    std::size_t n() const { return samples.rows(); }
    std::size_t dim() const { return samples.cols(); }
    bool has_labels() const { return !labels.empty(); }
};

enum class SyntheticKind {
    moon,                     // noisy half circle, intrinsic dim 2
    two_circles,              // concentric circle pair, intrinsic dim 2
    tangent_spheres,          // two touching spheres, intrinsic dim 3
    cylinders,                // two parallel cylinder shells, intrinsic dim 3
    line,                     // noisy segment, intrinsic dim 2
    two_clusters_timeseries,  // two static Gaussians plus a drifting one, dim 10
};

const char* kind_name(SyntheticKind k);
SyntheticKind kind_from_name(const std::string& name);

struct GenSpec {
    SyntheticKind kind = SyntheticKind::moon;
    std::size_t n = 1000;
    double noise = 0.05;
    std::size_t ambient_dim = 2;
    std::uint64_t seed = 1;
    // Time step for two_clusters_timeseries (0..9); must be 0 for the other
    // kinds. The drifting cluster starts on the first static cluster and ends
    // on the second.
    int step = 0;
};

// Deterministic synthetic data: equal specs produce byte-identical matrices.
// Shapes are generated in their intrinsic dimension and carried into
// ambient_dim by a seeded random linear map with orthonormal columns (the
// identity when ambient_dim equals the intrinsic dimension).
Dataset gen_synthetic(const GenSpec& spec);

// CSV with a header of f0..f{d-1} and an optional trailing "label" column.
// Values are written with 17 significant digits, so a round trip reproduces
// samples exactly.
void save_csv(const Dataset& d, const std::string& path);
Dataset load_csv(const std::string& path);

struct SplitPair {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
};

// Seeded uniform permutation split; train receives floor(train_frac * n)
// rows. Both sides must end up non-empty.
SplitPair split(const Dataset& d, double train_frac, std::uint64_t seed);

// Row-concatenation, keeping labels only when both sides carry them.
Dataset concat(const Dataset& a, const Dataset& b);

}  // namespace sepspec
