#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepspec/dataset.hpp"
#include "sepspec/graph.hpp"
#include "sepspec/mlp.hpp"

namespace sepspec {

struct TrainConfig {
    std::size_t k = 2;                 // embedding dimension; the net emits k+1
    std::size_t batch_size = 2048;
    std::size_t knn = 20;              // neighbors for the per-batch graph
    std::vector<std::size_t> hidden = {256, 256, 512};
    double lr = 1e-2;
    double min_lr = 1e-7;
    double lr_divisor = 10.0;
    double val_frac = 0.1;
    std::size_t max_epochs = 100000;   // safety cap; the schedule normally stops first
    std::size_t t_batches = 0;         // rotation-recovery batches; 0 = floor(n/m)
    std::uint64_t seed = 1;
    LaplacianVariant loss_variant = LaplacianVariant::unnormalized;
    LaplacianVariant separation_variant = LaplacianVariant::random_walk;

    // Epochs without validation improvement before the learning rate drops.
    std::size_t patience(std::size_t n) const;
    void validate() const;
};

struct TrainMeta {
    std::size_t epochs = 0;
    std::vector<double> train_curve;  // mean batch loss per epoch
    std::vector<double> val_curve;    // monitored loss per epoch
    double final_lr = 0.0;
    std::size_t lr_reductions = 0;
    // Largest deviation of (1/m) Y^T Y from the identity seen right after any
    // orthogonalization step.
    double max_ortho_violation = 0.0;
};

// Trained embedding network plus, once recovered, the rotation that aligns
// its outputs with individual spectral coordinates.
struct SepSpectralModel {
    Mlp net;
    TrainConfig config;
    Matrix rotation;                  // (k+1)-by-k, empty until recovered
    std::vector<double> eigenvalues;  // k, ascending, nonnegative
    TrainMeta meta;

    bool separated() const { return rotation.size() > 0; }
    std::size_t embed_dim() const { return config.k; }
};

// Rayleigh-quotient loss (1/m^2) tr(Y^T L Y) over one batch graph.
double rq_loss(const Matrix& y, const Laplacian& lap);

// Gradient of rq_loss with respect to Y.
void rq_loss_grad(const Matrix& y, const Laplacian& lap, Matrix& dy);

// Sets the ortho layer to sqrt(m) R^-1 from the QR of the pre-ortho outputs
// on this batch; returns the max-norm deviation of (1/m) Y^T Y from the
// identity measured on the same batch afterwards. Throws RankDeficientError
// when the batch does not span the output space. ws keeps this batch's
// activations, which the following grad_step consumes.
double orthonorm_step(Mlp& net, const Matrix& batch, MlpWorkspace& ws);

// One Adam update of the linear-stack weights; returns the batch loss before
// the update. The loss gradient follows two paths: through this batch's
// outputs, and through the ortho layer's analytic dependence on the
// orthogonalization batch (ortho_ws, filled by the preceding orthonorm_step,
// same batch size). Without the second path the objective is not
// scale-invariant and the pre-ortho outputs collapse toward rank deficiency.
// The ortho weights themselves are never updated.
double grad_step(Mlp& net, Adam& adam, const Matrix& batch, const Laplacian& lap, double lr,
                 MlpWorkspace& ws, MlpGrads& grads, const MlpWorkspace& ortho_ws);

// Trains the network by alternating orthogonalization and gradient steps over
// shuffled epochs, with a plateau-driven learning-rate ladder monitored on a
// held-out validation slice. The result is not yet separated.
SepSpectralModel train(const Dataset& train_set, const TrainConfig& config);

struct SeparationResult {
    Matrix rotation;                  // p-by-(p-1): eigenvector columns, trivial one dropped
    std::vector<double> eigenvalues;  // p-1, ascending, clamped nonnegative
    double trivial_eigenvalue = 0.0;  // the dropped (smallest) one
};

// Rotation recovery from output/Laplacian sample pairs: averages Y_i^T L_i
// Y_i, symmetrizes, diagonalizes, sorts ascending, and drops the column
// paired with the smallest eigenvalue. Y_i columns are expected near
// orthonormal (unit scale).
SeparationResult recover_rotation(const std::vector<Matrix>& ys, const std::vector<Laplacian>& laps);

// One-shot post-training separation: samples floor(n/m) batches (or
// config.t_batches when set), feeds scaled network outputs through
// recover_rotation, and stores rotation and eigenvalues on the model.
void separate(SepSpectralModel& model, const Dataset& train_set);

// Raw network outputs F(x), n-by-(k+1).
Matrix forward_outputs(const SepSpectralModel& model, const Matrix& x);

// Separated embedding F(x) * rotation, n-by-k. Requires a separated model.
Matrix embed(const SepSpectralModel& model, const Matrix& x);

// Versioned JSON persistence. Weights round-trip exactly.
void save_model(const SepSpectralModel& model, const std::string& path);
SepSpectralModel load_model(const std::string& path);
std::string model_to_json(const SepSpectralModel& model);
SepSpectralModel model_from_json(const std::string& text);

}  // namespace sepspec
