#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eeral/graph.hpp"
#include "eeral/inference.hpp"

namespace eeral {

enum class Strategy { EER, SA, LC, Margin, EC, Random };

const char* strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

struct ScoredNode {
    NodeRef node;
    double score = 0.0;
};

// One score per unlabeled node (never for labeled ones), higher means more
// informative. Entries follow the deterministic (graph, node) order.
struct SelectionScore {
    Strategy strategy = Strategy::EER;
    std::vector<ScoredNode> entries;
};

// Top-K result, ordered by (score desc, graph_id asc, node_index asc).
struct Selection {
    int iteration = 0;
    std::vector<ScoredNode> chosen;
};

using PotentialsFn = std::function<PotentialTables(const SceneGraph&)>;

// Average entropy after additionally clamping node `node` to `label`.
// Already-labeled nodes stay clamped through base_clamps; the newly clamped
// node contributes zero entropy.
double clamped_average_entropy(const SceneGraph& g, const PotentialTables& pots,
                               const ClampSet& base_clamps, int node, int label,
                               const InferenceConfig& cfg);

// Expected average entropy reduction for one node: base inference once, then
// one clamped inference per label, weighted by the node's base marginal.
double expected_entropy_reduction(const SceneGraph& g, const PotentialTables& pots,
                                  const ClampSet& base_clamps, int node,
                                  const InferenceConfig& cfg);

// Strategy sweeps. All of them clamp each graph's already-labeled nodes
// during inference and score every unlabeled node (scene and person alike).
// The heavy sweeps fan out over (graph, node) work items with OpenMP and
// reduce in deterministic order; serial:: variants are the single-threaded
// references and must match bit-for-bit.
SelectionScore score_eer(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                         const AnnotationPool& pool, const InferenceConfig& cfg);
SelectionScore score_entropy(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                             const AnnotationPool& pool, const InferenceConfig& cfg);
SelectionScore score_least_confidence(std::span<const SceneGraph> graphs,
                                      const PotentialsFn& potentials, const AnnotationPool& pool,
                                      const InferenceConfig& cfg);
SelectionScore score_margin(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                            const AnnotationPool& pool, const InferenceConfig& cfg);
SelectionScore score_expected_change(std::span<const SceneGraph> graphs,
                                     const PotentialsFn& potentials, const AnnotationPool& pool,
                                     const InferenceConfig& cfg);
SelectionScore score_random(const AnnotationPool& pool, std::uint64_t seed);

namespace serial {
SelectionScore score_eer(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                         const AnnotationPool& pool, const InferenceConfig& cfg);
SelectionScore score_expected_change(std::span<const SceneGraph> graphs,
                                     const PotentialsFn& potentials, const AnnotationPool& pool,
                                     const InferenceConfig& cfg);
}  // namespace serial

SelectionScore compute_scores(Strategy strategy, std::span<const SceneGraph> graphs,
                              const PotentialsFn& potentials, const AnnotationPool& pool,
                              const InferenceConfig& cfg, std::uint64_t random_seed);

// min(k, |U|) best nodes under the deterministic tie-break.
Selection top_k(const SelectionScore& scores, int k, int iteration = 0);

// CSV rows: iteration,graph_id,node_index,node_type,score,strategy
void write_selection_header(std::ostream& os);
void write_selection_rows(std::ostream& os, const Selection& sel, Strategy strategy);

}  // namespace eeral
