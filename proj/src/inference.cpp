#include "eeral/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "bp_kernel.hpp"
#include "exact_enum.hpp"

namespace eeral {

void PotentialTables::check_shapes(const SceneGraph& g) const {
    const int n = g.num_persons();
    const int ts = static_cast<int>(scene_unary.size());
    if (ts < 2) throw std::invalid_argument("potentials: scene unary too short");
    if (static_cast<int>(person_unary.size()) != n)
        throw std::invalid_argument("potentials: person unary count != N");
    const int ta = static_cast<int>(person_unary[0].size());
    if (ta < 2) throw std::invalid_argument("potentials: person unary too short");
    for (const auto& u : person_unary)
        if (static_cast<int>(u.size()) != ta)
            throw std::invalid_argument("potentials: ragged person unaries");
    if (scene_person.rows != ts || scene_person.cols != ta)
        throw std::invalid_argument("potentials: scene-person table shape mismatch");
    if (person_person.rows != ta || person_person.cols != ta)
        throw std::invalid_argument("potentials: person-person table shape mismatch");

    auto finite_vec = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    if (!finite_vec(scene_unary)) throw numerical_error("potentials: non-finite scene unary");
    for (const auto& u : person_unary)
        if (!finite_vec(u)) throw numerical_error("potentials: non-finite person unary");
    if (!scene_person.finite() || !person_person.finite())
        throw numerical_error("potentials: non-finite pairwise table");
}

namespace {

void check_clamps(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps) {
    const int ts = static_cast<int>(pots.scene_unary.size());
    const int ta = static_cast<int>(pots.person_unary[0].size());
    for (const auto& [node, label] : clamps) {
        if (node < 0 || node >= g.num_nodes())
            throw std::out_of_range("clamp: node index out of range");
        const int card = node == 0 ? ts : ta;
        if (label < 0 || label >= card) throw std::out_of_range("clamp: label out of range");
    }
}

void force_indicators(Marginals& m, const ClampSet& clamps) {
    for (const auto& [node, label] : clamps) {
        auto& d = m.dist[static_cast<size_t>(node)];
        std::fill(d.begin(), d.end(), 0.0);
        d[static_cast<size_t>(label)] = 1.0;
    }
}

}  // namespace

Marginals infer(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                const InferenceConfig& cfg) {
    pots.check_shapes(g);
    check_clamps(g, pots, clamps);

    Marginals m;
    if (cfg.backend == Backend::ExactEnumeration) {
        auto st = detail::exact_stats(g, pots, clamps, 10'000'000, /*want_pairs=*/false);
        m.dist = std::move(st.node_marg);
    } else {
        if (cfg.rounds < 1) throw std::invalid_argument("inference: rounds must be >= 1");
        if (cfg.damping < 0.0 || cfg.damping >= 1.0)
            throw std::invalid_argument("inference: damping must be in [0,1)");
        auto run = detail::bp_forward(g, pots, clamps, cfg.rounds, cfg.damping,
                                      /*keep_trace=*/false);
        m.dist = std::move(run.belief);
    }
    force_indicators(m, clamps);
    return m;
}

double exact_joint_log_z(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                         std::uint64_t budget) {
    pots.check_shapes(g);
    check_clamps(g, pots, clamps);
    return detail::exact_stats(g, pots, clamps, budget, /*want_pairs=*/false).log_z;
}

double node_entropy(std::span<const double> dist) {
    double sum = 0.0;
    for (double p : dist) {
        if (p < 0.0 || p > 1.0 + 1e-9)
            throw std::invalid_argument("node_entropy: probability out of [0,1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("node_entropy: distribution not normalized");
    double h = 0.0;
    for (double p : dist)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

double average_entropy(const Marginals& m) {
    if (m.dist.empty()) throw std::invalid_argument("average_entropy: empty marginals");
    double acc = 0.0;
    for (const auto& d : m.dist) acc += node_entropy(d);
    return acc / static_cast<double>(m.dist.size());
}

}  // namespace eeral
