#pragma once

// Exhaustive enumeration over clamp-consistent joint assignments. Backs the
// ExactEnumeration inference backend, the partition-function op, and the
// exact-backend training gradient (via expected pair statistics).

#include <cstdint>

#include "eeral/graph.hpp"
#include "eeral/inference.hpp"

namespace eeral::detail {

// ts * ta^n, saturating at uint64 max on overflow.
std::uint64_t joint_state_count(int ts, int ta, int n);

struct EnumStats {
    double log_z = 0.0;
    std::vector<std::vector<double>> node_marg;  // normalized per node
    // Expected pair indicator sums under the restricted distribution:
    //   pair_sp(s,t)  = sum over persons p of P(scene=s, person_p=t)
    //   pair_pp(u,v)  = sum over person pairs i<j of P(y_i=u, y_j=v)
    Mat pair_sp;
    Mat pair_pp;
};

EnumStats exact_stats(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                      std::uint64_t budget, bool want_pairs);

}  // namespace eeral::detail
