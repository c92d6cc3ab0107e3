#include "exact_enum.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eeral::detail {

std::uint64_t joint_state_count(int ts, int ta, int n) {
    std::uint64_t count = static_cast<std::uint64_t>(ts);
    const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
    for (int i = 0; i < n; ++i) {
        if (count > cap / static_cast<std::uint64_t>(ta)) return cap;
        count *= static_cast<std::uint64_t>(ta);
    }
    return count;
}

namespace {

// Depth-first walk over assignments with incrementally maintained scores.
// pp_in[t] caches sum over already-assigned persons j of pp(y_j, t), so each
// extension costs O(1) lookups plus an O(T) push.
template <typename Visitor>
void walk(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
          Visitor&& visit) {
    const int n = g.num_persons();
    const int ts = static_cast<int>(pots.scene_unary.size());
    const int ta = static_cast<int>(pots.person_unary[0].size());

    std::vector<int> y(static_cast<size_t>(n) + 1, 0);
    std::vector<std::vector<double>> pp_in(static_cast<size_t>(n) + 1,
                                           std::vector<double>(static_cast<size_t>(ta), 0.0));

    auto clamp_of = [&](int node) -> int {
        auto it = clamps.find(node);
        return it == clamps.end() ? -1 : it->second;
    };

    // person levels are 1..n; level n+1 is a visit
    auto descend = [&](auto&& self, int level, double score) -> void {
        if (level == n + 1) {
            visit(y, score);
            return;
        }
        const int fixed = clamp_of(level);
        const int lo = fixed >= 0 ? fixed : 0;
        const int hi = fixed >= 0 ? fixed : ta - 1;
        for (int t = lo; t <= hi; ++t) {
            y[static_cast<size_t>(level)] = t;
            const double ext = pots.person_unary[static_cast<size_t>(level - 1)][static_cast<size_t>(t)] +
                               pots.scene_person(y[0], t) +
                               pp_in[static_cast<size_t>(level)][static_cast<size_t>(t)];
            if (level < n) {
                auto& next = pp_in[static_cast<size_t>(level) + 1];
                const auto& cur = pp_in[static_cast<size_t>(level)];
                for (int u = 0; u < ta; ++u)
                    next[static_cast<size_t>(u)] =
                        cur[static_cast<size_t>(u)] + pots.person_person(t, u);
            }
            self(self, level + 1, score + ext);
        }
    };

    const int scene_fixed = clamp_of(0);
    const int slo = scene_fixed >= 0 ? scene_fixed : 0;
    const int shi = scene_fixed >= 0 ? scene_fixed : ts - 1;
    for (int s = slo; s <= shi; ++s) {
        y[0] = s;
        descend(descend, 1, pots.scene_unary[static_cast<size_t>(s)]);
    }
}

}  // namespace

EnumStats exact_stats(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                      std::uint64_t budget, bool want_pairs) {
    pots.check_shapes(g);
    const int n = g.num_persons();
    const int ts = static_cast<int>(pots.scene_unary.size());
    const int ta = static_cast<int>(pots.person_unary[0].size());
    if (joint_state_count(ts, ta, n) > budget)
        throw config_error("exact enumeration budget exceeded: " + std::to_string(ts) + "*" +
                           std::to_string(ta) + "^" + std::to_string(n) + " states");
    for (const auto& [node, label] : clamps) {
        if (node < 0 || node > n) throw std::out_of_range("clamp node out of range");
        const int card = node == 0 ? ts : ta;
        if (label < 0 || label >= card) throw std::out_of_range("clamp label out of range");
    }

    // Pass 1: max log score for a stable shift.
    double max_score = -std::numeric_limits<double>::infinity();
    walk(g, pots, clamps, [&](const std::vector<int>&, double score) {
        if (score > max_score) max_score = score;
    });

    EnumStats st;
    st.node_marg.assign(static_cast<size_t>(n) + 1, {});
    st.node_marg[0].assign(static_cast<size_t>(ts), 0.0);
    for (int p = 1; p <= n; ++p) st.node_marg[static_cast<size_t>(p)].assign(static_cast<size_t>(ta), 0.0);
    if (want_pairs) {
        st.pair_sp = Mat(ts, ta);
        st.pair_pp = Mat(ta, ta);
    }

    // Pass 2: accumulate shifted weights.
    double total = 0.0;
    walk(g, pots, clamps, [&](const std::vector<int>& y, double score) {
        const double w = std::exp(score - max_score);
        total += w;
        for (int node = 0; node <= n; ++node)
            st.node_marg[static_cast<size_t>(node)][static_cast<size_t>(y[static_cast<size_t>(node)])] += w;
        if (want_pairs) {
            for (int p = 1; p <= n; ++p) st.pair_sp(y[0], y[static_cast<size_t>(p)]) += w;
            for (int i = 1; i <= n; ++i)
                for (int j = i + 1; j <= n; ++j)
                    st.pair_pp(y[static_cast<size_t>(i)], y[static_cast<size_t>(j)]) += w;
        }
    });

    if (!(total > 0.0))
        throw numerical_error("exact enumeration: zero total probability mass");
    st.log_z = max_score + std::log(total);
    for (auto& m : st.node_marg)
        for (double& x : m) x /= total;
    if (want_pairs) {
        for (double& x : st.pair_sp.a) x /= total;
        for (double& x : st.pair_pp.a) x /= total;
    }
    return st;
}

}  // namespace eeral::detail
