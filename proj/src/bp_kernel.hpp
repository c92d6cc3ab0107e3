#pragma once

// Internal unrolled sum-product kernel shared by infer() and the loss
// gradient. Synchronous flooding schedule: every round recomputes all
// directed messages from the previous round's values, which makes the
// computation a fixed-depth differentiable graph.

#include <vector>

#include "eeral/graph.hpp"
#include "eeral/inference.hpp"

namespace eeral::detail {

// Canonical directed-message indexing for one graph. Edge e between (a,b),
// a < b, owns directed slots 2e (a->b) and 2e+1 (b->a).
struct Topology {
    int num_nodes = 0;
    int ts = 0, ta = 0;
    std::vector<int> card;                 // labels per node
    std::vector<SceneGraph::Edge> edges;   // canonical order
    struct Dir {
        int from = 0, to = 0, edge = 0;
    };
    std::vector<Dir> dir;                  // 2 per edge
    std::vector<std::vector<int>> in_of;   // per node: incoming directed indices

    static Topology build(const SceneGraph& g, int ts, int ta);
};

// Forward state. When keep_trace is set, per-round h (aggregated inputs) and
// q (pre-normalization messages) are retained for the reverse pass.
struct BpRun {
    Topology topo;
    std::vector<std::vector<double>> unary;  // effective log-unaries (clamps applied)
    std::vector<std::vector<std::vector<double>>> msg;  // [rounds+1][dir][card(to)]
    std::vector<std::vector<std::vector<double>>> h;    // [rounds][dir][card(from)]
    std::vector<std::vector<std::vector<double>>> q;    // [rounds][dir][card(to)]
    std::vector<std::vector<double>> belief_log;        // unnormalized log-beliefs
    std::vector<std::vector<double>> belief;            // normalized marginals
};

BpRun bp_forward(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                 int rounds, double damping, bool keep_trace);

// Adjoints of the inputs given adjoints of the unnormalized log-beliefs.
// Valid only for traces produced without clamps (training never clamps).
struct BpGrad {
    std::vector<std::vector<double>> d_unary;
    Mat d_scene_person;   // w.r.t. the scene-person table as passed in
    Mat d_person_person;  // w.r.t. the person-person table as passed in
};

BpGrad bp_backward(const SceneGraph& g, const PotentialTables& pots, const BpRun& run,
                   const std::vector<std::vector<double>>& d_belief_log, int rounds,
                   double damping);

}  // namespace eeral::detail
