#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepspec/dataset.hpp"
#include "sepspec/matrix.hpp"
#include "sepspec/mlp.hpp"
#include "sepspec/specnet.hpp"

namespace sepspec {

// Undirected positive edge with its high-dimensional affinity weight.
struct UmapEdge {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double weight = 0.0;  // in (0, 1]
};

struct UmapEdgeSet {
    std::size_t n = 0;  // vertex count the indices refer to
    std::vector<UmapEdge> edges;
};

// Repulsive pair drawn by negative sampling; treated as weight-zero.
struct UmapNegative {
    std::uint32_t i = 0;
    std::uint32_t v = 0;
};

// Nonzero entries of the symmetrized kNN affinity as an edge list, each
// undirected pair once (i < j). After symmetrization every vertex has at
// least n_neighbors incident edges.
UmapEdgeSet build_umap_graph(const Matrix& x, std::size_t n_neighbors);

// Exact two-term cross-entropy of one edge: w_h log(w_h / w_l) +
// (1 - w_h) log((1 - w_h) / (1 - w_l)). Zero when the weights agree.
double umap_edge_kl(double w_h, double w_l);

// Sampled cross-entropy of an embedding against the positive edges plus the
// given repulsive pairs, normalized by the edge count. The low-dimensional
// weight is w_l = 1 / (1 + a ||y_i - y_j||^(2b)). Entropy terms that are
// constant in Y are dropped; logs clamp their argument at 1e-4 from below.
double umap_loss(const Matrix& y, const UmapEdgeSet& edges, const std::vector<UmapNegative>& negs,
                 double a, double b);

// Gradient of umap_loss with respect to Y; returns the loss. Pairs whose log
// argument sits at the clamp contribute zero gradient.
double umap_loss_grad(const Matrix& y, const UmapEdgeSet& edges,
                      const std::vector<UmapNegative>& negs, double a, double b, Matrix& dy);

struct NumapConfig {
    std::size_t out_dim = 2;       // target dimension l, at most se.k
    std::size_t n_neighbors = 10;  // input-graph neighbors
    double kernel_a = 1.0;         // low-dimensional kernel parameters
    double kernel_b = 1.0;
    std::size_t neg_samples = 5;   // repulsive pairs per positive edge
    std::vector<std::size_t> g_hidden = {200, 200, 200};
    double lr = 1e-3;
    std::size_t epochs = 150;
    bool residual = true;          // add SE coordinates 1..l to the output
    bool use_se = true;            // false: train g_net on raw inputs (baseline)
    // Fresh repulsive pairs every epoch; tests freeze the schedule to check
    // descent on a fixed objective.
    bool resample_negatives = true;
    std::uint64_t seed = 1;
    TrainConfig se;                // stage-1 settings, se.k = SE dimension

    void validate() const;
};

// Two-stage embedding: a spectral-embedding stage (frozen after training)
// followed by a residual refinement network trained with the sampled
// cross-entropy. With use_se = false the refinement network runs directly on
// the raw inputs and no residual applies; that variant is the controlled
// baseline sharing every other code path.
struct NumapModel {
    NumapConfig config;
    SepSpectralModel se_model;  // meaningful only when config.use_se
    Mlp g_net;
    std::vector<double> loss_curve;  // sampled loss per stage-2 epoch

    std::size_t out_dim() const { return config.out_dim; }
};

// Stage 1 trains and separates the spectral model (skipped when use_se is
// false), stage 2 trains g_net with Adam on the sampled cross-entropy, the
// spectral model frozen. The g_net final layer starts at zero, so the initial
// embedding equals the first out_dim spectral coordinates when the residual
// path is on.
NumapModel train_numap(const Dataset& train_set, const NumapConfig& config);

// Feed-forward embedding of arbitrary rows; no graph is built.
Matrix embed_numap(const NumapModel& model, const Matrix& x);

void save_numap(const NumapModel& model, const std::string& path);
NumapModel load_numap(const std::string& path);
std::string numap_to_json(const NumapModel& model);
NumapModel numap_from_json(const std::string& text);

}  // namespace sepspec
