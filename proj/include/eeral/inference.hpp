#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "eeral/common.hpp"
#include "eeral/graph.hpp"

namespace eeral {

// Log-domain clique potentials for one graph. The pairwise tables are shared
// across all edges of their kind.
struct PotentialTables {
    std::vector<double> scene_unary;                // num_activities
    std::vector<std::vector<double>> person_unary;  // N x num_actions
    Mat scene_person;                               // num_activities x num_actions
    Mat person_person;                              // num_actions x num_actions, symmetric

    void check_shapes(const SceneGraph& g) const;
};

// node_index -> fixed label. Realizes conditioning events: inference treats a
// clamped node as observed at that label.
using ClampSet = std::map<int, int>;

enum class Backend {
    SumProduct,        // fixed-round synchronous log-space message passing
    ExactEnumeration,  // sums the full joint; verification oracle for small graphs
};

struct InferenceConfig {
    int rounds = 10;        // message-passing sweeps; ignored by ExactEnumeration
    Backend backend = Backend::SumProduct;
    double damping = 0.0;   // in [0,1); 0 reproduces undamped updates bit-for-bit
};

// Per-node label distributions. dist[0] has scene length, dist[1..N] person
// length. Clamped nodes hold exact indicator vectors.
struct Marginals {
    std::vector<std::vector<double>> dist;

    int num_nodes() const { return static_cast<int>(dist.size()); }
};

Marginals infer(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                const InferenceConfig& cfg);

// log of the partition function restricted to clamp-consistent assignments.
// Throws when the state space exceeds the enumeration budget.
double exact_joint_log_z(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                         std::uint64_t budget = 10'000'000);

// Shannon entropy in nats; zero-probability terms contribute 0.
// Throws if the vector is not normalized to within 1e-6.
double node_entropy(std::span<const double> dist);

// Mean of node entropies over all nodes of the graph (scene included).
// Clamped nodes carry indicator marginals and so contribute 0.
double average_entropy(const Marginals& m);

}  // namespace eeral
