#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eeral/common.hpp"
#include "eeral/graph.hpp"
#include "eeral/inference.hpp"

namespace eeral {

// Log-linear model: unary logits are linear in the node features, pairwise
// compatibilities are free tables shared across all edges and graphs. The
// person-person table is used symmetrically, (psi_pp + psi_pp^T)/2.
struct ModelParams {
    Mat w_scene;   // num_activities x scene_dim
    Mat w_action;  // num_actions x person_dim, shared across persons
    Mat psi_sp;    // num_activities x num_actions
    Mat psi_pp;    // num_actions x num_actions

    static ModelParams zeros(const LabelSpace& space, int scene_dim, int person_dim);
    static ModelParams random_init(const LabelSpace& space, int scene_dim, int person_dim,
                                   double scale, std::uint64_t seed);

    bool finite() const;
    bool same_shape(const ModelParams& o) const;

    void add_scaled(const ModelParams& o, double s);  // this += s * o
    void scale(double s);
    double max_abs() const;
};

// Gradients and momentum buffers share the parameter layout.
using ModelGrad = ModelParams;

struct TrainConfig {
    double base_lr = 0.0005;
    double lr_iter_mult = 0.5;
    double weight_decay = 0.05;
    double wd_iter_mult = 0.1;
    int epochs_per_iteration = 60;
    double momentum = 0.9;
    int batch = 32;  // graphs per gradient step
    std::uint64_t rng_seed = 1;

    void validate() const;
};

PotentialTables unary_logits(const ModelParams& params, const SceneGraph& g);

// Partial-label negative log likelihood: sum over labeled nodes of
// -log P(true label), marginals from unclamped inference. Probabilities are
// floored at 1e-12 before the log.
double loss(const ModelParams& params, std::span<const SceneGraph> graphs,
            const AnnotationPool& pool, const InferenceConfig& cfg);
double loss(const ModelParams& params, const std::vector<const SceneGraph*>& graphs,
            const AnnotationPool& pool, const InferenceConfig& cfg);

// Exact reverse-mode derivative of loss(). SumProduct differentiates through
// the unrolled rounds; ExactEnumeration uses expected-statistic differences.
// Per-graph contributions are computed in parallel and reduced in graph
// order, so results do not depend on worker count.
ModelGrad loss_gradient(const ModelParams& params, std::span<const SceneGraph> graphs,
                        const AnnotationPool& pool, const InferenceConfig& cfg);
ModelGrad loss_gradient(const ModelParams& params, const std::vector<const SceneGraph*>& graphs,
                        const AnnotationPool& pool, const InferenceConfig& cfg);

namespace serial {
// Single-threaded reference; must produce bit-identical output.
ModelGrad loss_gradient(const ModelParams& params, const std::vector<const SceneGraph*>& graphs,
                        const AnnotationPool& pool, const InferenceConfig& cfg);
}  // namespace serial

struct SgdState {
    ModelGrad velocity;
    explicit SgdState(const ModelParams& like);
};

// One SGD step: v <- momentum*v + (grad + wd*params); params <- params - lr*v.
// Throws numerical_error on a non-finite gradient.
ModelParams train_step(const ModelParams& params, SgdState& state,
                       const std::vector<const SceneGraph*>& graphs, const AnnotationPool& pool,
                       const TrainConfig& tcfg, const InferenceConfig& icfg, double effective_lr,
                       double effective_wd);

// Geometric decay per active-learning iteration.
std::pair<double, double> schedule(int iteration, const TrainConfig& cfg);

// Runs epochs_per_iteration epochs of shuffled mini-batch SGD at the rates
// given by schedule(iteration). Momentum starts fresh (the solver is
// re-initialized each iteration). The per-batch learning rate is divided by
// the number of labeled nodes in the batch, so steps are per-label sized.
void train_iteration(ModelParams& params, std::span<const SceneGraph> graphs,
                     const AnnotationPool& pool, const TrainConfig& tcfg,
                     const InferenceConfig& icfg, int iteration);

// Checkpoint text format: `params <T_s> <T_a> <d_s> <d_a>` then row-major
// lines for w_scene, w_action, psi_sp, psi_pp. Round-trips bit-exactly.
void save_params(std::ostream& os, const ModelParams& params);
ModelParams load_params(std::istream& is);
void save_params_file(const std::string& path, const ModelParams& params);
ModelParams load_params_file(const std::string& path);

}  // namespace eeral
