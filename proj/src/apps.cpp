#include "sepspec/apps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sepspec/error.hpp"
#include "sepspec/linalg.hpp"

namespace sepspec {

namespace {

// Unit norm with the largest-magnitude entry positive (first such entry on
// ties), matching the dense eigenvector convention.
void unitize_signed(std::vector<double>& v) {
    double norm2 = 0.0;
    std::size_t arg = 0;
    double top = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        norm2 += v[i] * v[i];
        const double a = std::fabs(v[i]);
        if (a > top) {
            top = a;
            arg = i;
        }
    }
    if (norm2 == 0.0) throw NumericError("fiedler: zero embedding column");
    const double scale = (v[arg] < 0.0 ? -1.0 : 1.0) / std::sqrt(norm2);
    for (double& x : v) x *= scale;
}

// (1 - lambda)^t with the eigenvalue clipped into [0, 2]; fractional powers
// of a negative base are undefined, so those are rejected.
double decay_factor(double lambda, double t, bool& clipped) {
    if (lambda < 0.0 || lambda > 2.0) {
        clipped = true;
        lambda = std::clamp(lambda, 0.0, 2.0);
    }
    const double base = 1.0 - lambda;
    if (base < 0.0 && t != std::floor(t)) {
        throw NumericError("diffusion_map: fractional time with a negative operator eigenvalue");
    }
    return std::pow(base, t);
}

DiffusionResult scale_columns(const Matrix& vectors, const std::vector<double>& values, double t) {
    const std::size_t n = vectors.rows(), k = vectors.cols();
    DiffusionResult out;
    out.coords.resize(n, k);
    out.decay.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        out.decay[c] = decay_factor(values[c], t, out.clipped);
        for (std::size_t r = 0; r < n; ++r) out.coords(r, c) = out.decay[c] * vectors(r, c);
    }
    return out;
}

}  // namespace

FiedlerResult fiedler(const Laplacian& lap) {
    const SpectralResult sr = spectral_oracle(lap, 2, /*includes_trivial=*/true);
    FiedlerResult out;
    out.vector = sr.vectors.col(1);
    out.value = sr.values[1];
    return out;
}

FiedlerResult fiedler(const SepSpectralModel& model, const Matrix& points) {
    const Matrix y = embed(model, points);
    FiedlerResult out;
    out.vector = y.col(0);
    unitize_signed(out.vector);
    out.value = model.eigenvalues.at(0);
    return out;
}

DiffusionResult diffusion_map(const SparseAffinity& aff, std::size_t k, double t) {
    if (t < 0.0) throw std::invalid_argument("diffusion_map: negative diffusion time");
    const Laplacian lap = laplacian(aff, LaplacianVariant::random_walk);
    const SpectralResult sr = spectral_oracle(lap, k, /*includes_trivial=*/false);
    return scale_columns(sr.vectors, sr.values, t);
}

DiffusionResult diffusion_map(const SepSpectralModel& model, const Matrix& points, double t) {
    if (t < 0.0) throw std::invalid_argument("diffusion_map: negative diffusion time");
    const Matrix y = embed(model, points);
    return scale_columns(y, model.eigenvalues, t);
}

}  // namespace sepspec
