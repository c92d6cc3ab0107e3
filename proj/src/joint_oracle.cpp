#include "eeral/joint_oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eeral::oracle {

namespace {

std::uint64_t checked_states(int ts, int ta, int persons, std::uint64_t max_states) {
    long double states = ts;
    for (int i = 0; i < persons; ++i) states *= ta;
    if (states > static_cast<long double>(max_states))
        throw config_error("joint oracle: state space too large");
    return static_cast<std::uint64_t>(states);
}

double assignment_log_score(const SceneGraph& g, const PotentialTables& pots,
                            const std::vector<int>& y) {
    const int n = g.num_persons();
    double s = pots.scene_unary[static_cast<size_t>(y[0])];
    for (int p = 1; p <= n; ++p) {
        s += pots.person_unary[static_cast<size_t>(p - 1)][static_cast<size_t>(y[static_cast<size_t>(p)])];
        s += pots.scene_person(y[0], y[static_cast<size_t>(p)]);
    }
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            s += pots.person_person(y[static_cast<size_t>(i)], y[static_cast<size_t>(j)]);
    return s;
}

bool consistent(const std::vector<int>& y, const ClampSet& clamps) {
    for (const auto& [node, label] : clamps)
        if (y[static_cast<size_t>(node)] != label) return false;
    return true;
}

double entropy_of(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

}  // namespace

void JointTable::decode(std::uint64_t index, std::vector<int>& labels) const {
    labels.assign(static_cast<size_t>(persons) + 1, 0);
    for (int p = persons; p >= 1; --p) {
        labels[static_cast<size_t>(p)] = static_cast<int>(index % static_cast<std::uint64_t>(ta));
        index /= static_cast<std::uint64_t>(ta);
    }
    labels[0] = static_cast<int>(index);
}

JointTable joint_table(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                       std::uint64_t max_states) {
    JointTable t;
    t.ts = static_cast<int>(pots.scene_unary.size());
    t.ta = static_cast<int>(pots.person_unary[0].size());
    t.persons = g.num_persons();
    const std::uint64_t states = checked_states(t.ts, t.ta, t.persons, max_states);
    t.prob.assign(states, 0.0);

    std::vector<int> y;
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < states; ++i) {
        t.decode(i, y);
        if (!consistent(y, clamps)) continue;
        const double s = assignment_log_score(g, pots, y);
        t.prob[i] = s;
        if (s > max_score) max_score = s;
    }
    long double total = 0.0L;
    for (std::uint64_t i = 0; i < states; ++i) {
        t.decode(i, y);
        if (!consistent(y, clamps)) continue;
        const long double w = std::exp(static_cast<long double>(t.prob[i]) - max_score);
        t.prob[i] = static_cast<double>(w);
        total += w;
    }
    if (total <= 0.0L) throw numerical_error("joint oracle: zero mass");
    for (std::uint64_t i = 0; i < states; ++i) {
        t.decode(i, y);
        if (!consistent(y, clamps)) {
            t.prob[i] = 0.0;
            continue;
        }
        t.prob[i] = static_cast<double>(t.prob[i] / static_cast<double>(total));
    }
    return t;
}

std::vector<std::vector<double>> node_marginals(const JointTable& table) {
    std::vector<std::vector<double>> m(static_cast<size_t>(table.persons) + 1);
    m[0].assign(static_cast<size_t>(table.ts), 0.0);
    for (int p = 1; p <= table.persons; ++p) m[static_cast<size_t>(p)].assign(static_cast<size_t>(table.ta), 0.0);
    std::vector<int> y;
    for (std::uint64_t i = 0; i < table.states(); ++i) {
        if (table.prob[i] == 0.0) continue;
        table.decode(i, y);
        for (int node = 0; node <= table.persons; ++node)
            m[static_cast<size_t>(node)][static_cast<size_t>(y[static_cast<size_t>(node)])] += table.prob[i];
    }
    return m;
}

double log_z(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
             bool reversed, std::uint64_t max_states) {
    const int ts = static_cast<int>(pots.scene_unary.size());
    const int ta = static_cast<int>(pots.person_unary[0].size());
    const std::uint64_t states = checked_states(ts, ta, g.num_persons(), max_states);

    JointTable shape;
    shape.ts = ts;
    shape.ta = ta;
    shape.persons = g.num_persons();

    std::vector<int> y;
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < states; ++i) {
        shape.decode(i, y);
        if (!consistent(y, clamps)) continue;
        max_score = std::max(max_score, assignment_log_score(g, pots, y));
    }
    long double total = 0.0L;
    if (!reversed) {
        for (std::uint64_t i = 0; i < states; ++i) {
            shape.decode(i, y);
            if (!consistent(y, clamps)) continue;
            total += std::exp(static_cast<long double>(assignment_log_score(g, pots, y)) - max_score);
        }
    } else {
        for (std::uint64_t i = states; i-- > 0;) {
            shape.decode(i, y);
            if (!consistent(y, clamps)) continue;
            total += std::exp(static_cast<long double>(assignment_log_score(g, pots, y)) - max_score);
        }
    }
    return max_score + static_cast<double>(std::log(total));
}

double expected_entropy_reduction(const SceneGraph& g, const PotentialTables& pots,
                                  const ClampSet& base_clamps, int node,
                                  std::uint64_t max_states) {
    if (base_clamps.count(node))
        throw std::invalid_argument("joint oracle: node already clamped");
    const JointTable base = joint_table(g, pots, base_clamps, max_states);
    const auto base_marg = node_marginals(base);
    const int num_nodes = base.persons + 1;

    double h_bar = 0.0;
    for (const auto& m : base_marg) h_bar += entropy_of(m);
    h_bar /= static_cast<double>(num_nodes);

    const int card = node == 0 ? base.ts : base.ta;
    double expected = 0.0;
    for (int j = 0; j < card; ++j) {
        const double w = base_marg[static_cast<size_t>(node)][static_cast<size_t>(j)];
        if (w <= 0.0) continue;
        ClampSet clamps = base_clamps;
        clamps[node] = j;
        const JointTable cond = joint_table(g, pots, clamps, max_states);
        const auto cond_marg = node_marginals(cond);
        double h = 0.0;
        for (int n = 0; n < num_nodes; ++n) {
            if (n == node) continue;  // the clamped node contributes nothing
            h += entropy_of(cond_marg[static_cast<size_t>(n)]);
        }
        expected += w * (h / static_cast<double>(num_nodes));
    }
    return h_bar - expected;
}

}  // namespace eeral::oracle
