#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "eeral/dataset.hpp"
#include "eeral/model.hpp"
#include "eeral/selection.hpp"

namespace eeral {

// Simulated noiseless oracle: returns the stored ground truth for each
// queried node. Throws on an unknown reference.
std::vector<std::pair<NodeRef, int>> oracle_answer(
    const std::map<std::string, GroundTruth>& truths, std::span<const NodeRef> refs);

struct LoopConfig {
    int k_per_iteration = 50;
    int num_iterations = 8;
    Strategy strategy = Strategy::EER;
    TrainConfig train;
    InferenceConfig infer;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    size_t labeled_total = 0;
    size_t labeled_scene = 0;
    size_t labeled_action = 0;
    double scene_acc = 0.0;
    double action_acc = 0.0;
    double lr = 0.0;
    double wd = 0.0;
    double seconds = 0.0;         // wall time of this iteration; not part of any CSV file
    size_t pool_unlabeled = 0;    // |U| at selection time (0 when no selection ran)
    size_t pool_unlabeled_scene = 0;
    Selection selection;          // empty when no selection was made
};

// The iterative protocol. For t = 0..num_iterations: train at schedule(t)
// rates (warm start, fresh momentum), evaluate on the test split, and, while
// t < num_iterations and unlabeled nodes remain, score U, take top K, query
// the oracle and commit. Once U is exhausted the remaining iterations are
// pure training. Iteration 0's metrics depend only on the initial pool, so
// they are identical across strategies under the same seed.
std::vector<IterationRecord> run_active_learning(
    const Dataset& ds, const ModelParams& initial_params, const LoopConfig& cfg,
    const std::function<void(const IterationRecord&)>& on_record = nullptr);

// Test-set marginals (no clamps) for the current parameters.
std::vector<Marginals> evaluate_marginals(const ModelParams& params,
                                          std::span<const SceneGraph> test_graphs,
                                          const InferenceConfig& cfg);

}  // namespace eeral
