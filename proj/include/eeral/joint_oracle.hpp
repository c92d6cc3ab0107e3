#pragma once

// Reference computations over the explicitly materialized joint distribution.
// Everything here is deliberately written as flat index-decoding loops,
// independent of the message-passing and recursive-enumeration code paths it
// is used to check.

#include <cstdint>
#include <vector>

#include "eeral/graph.hpp"
#include "eeral/inference.hpp"

namespace eeral::oracle {

// Normalized probability of every joint assignment (row-major mixed radix:
// scene label major, then persons). Clamp-inconsistent assignments carry
// probability zero.
struct JointTable {
    int ts = 0, ta = 0, persons = 0;
    std::vector<double> prob;

    std::uint64_t states() const { return prob.size(); }
    void decode(std::uint64_t index, std::vector<int>& labels) const;
};

JointTable joint_table(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                       std::uint64_t max_states = 4'000'000);

std::vector<std::vector<double>> node_marginals(const JointTable& table);

// log of the unnormalized clamp-consistent mass, accumulated in long double.
// `reversed` flips the summation order (order-independence check).
double log_z(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
             bool reversed = false, std::uint64_t max_states = 4'000'000);

// Expected average entropy reduction of one node computed straight from the
// joint table: true conditionals, true weights, plain means.
double expected_entropy_reduction(const SceneGraph& g, const PotentialTables& pots,
                                  const ClampSet& base_clamps, int node,
                                  std::uint64_t max_states = 4'000'000);

}  // namespace eeral::oracle
