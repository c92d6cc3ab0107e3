#include "bp_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eeral::detail {

namespace {

constexpr double kClampLogZero = -1e30;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// exp(table - max(table)), so products with exp-shifted h terms cannot
// overflow for any finite potentials.
struct ExpTable {
    Mat e;        // exp(psi - shift)
    double shift; // max entry of psi
};

ExpTable exp_shifted(const Mat& m) {
    ExpTable t;
    t.shift = kNegInf;
    for (double v : m.a) t.shift = std::max(t.shift, v);
    t.e = Mat(m.rows, m.cols);
    for (size_t i = 0; i < m.a.size(); ++i) t.e.a[i] = std::exp(m.a[i] - t.shift);
    return t;
}

Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) t(c, r) = m(r, c);
    return t;
}

}  // namespace

Topology Topology::build(const SceneGraph& g, int ts, int ta) {
    Topology t;
    t.num_nodes = g.num_nodes();
    t.ts = ts;
    t.ta = ta;
    t.card.assign(static_cast<size_t>(t.num_nodes), ta);
    t.card[0] = ts;
    t.edges = g.edges();
    t.dir.reserve(t.edges.size() * 2);
    t.in_of.assign(static_cast<size_t>(t.num_nodes), {});
    for (size_t e = 0; e < t.edges.size(); ++e) {
        const auto& ed = t.edges[e];
        t.dir.push_back({ed.a, ed.b, static_cast<int>(e)});
        t.dir.push_back({ed.b, ed.a, static_cast<int>(e)});
        t.in_of[static_cast<size_t>(ed.b)].push_back(static_cast<int>(2 * e));
        t.in_of[static_cast<size_t>(ed.a)].push_back(static_cast<int>(2 * e + 1));
    }
    return t;
}

BpRun bp_forward(const SceneGraph& g, const PotentialTables& pots, const ClampSet& clamps,
                 int rounds, double damping, bool keep_trace) {
    BpRun run;
    run.topo = Topology::build(g, static_cast<int>(pots.scene_unary.size()),
                               static_cast<int>(pots.person_unary.empty()
                                                    ? 0
                                                    : pots.person_unary[0].size()));
    const Topology& topo = run.topo;
    const int num_dir = static_cast<int>(topo.dir.size());

    // Effective log-unaries: a clamp replaces the node's unary with an
    // indicator in log space (0 at the label, a large negative constant
    // elsewhere) so the arithmetic stays finite.
    run.unary.resize(static_cast<size_t>(topo.num_nodes));
    run.unary[0] = pots.scene_unary;
    for (int p = 1; p < topo.num_nodes; ++p)
        run.unary[static_cast<size_t>(p)] = pots.person_unary[static_cast<size_t>(p - 1)];
    for (const auto& [node, label] : clamps) {
        auto& u = run.unary[static_cast<size_t>(node)];
        std::fill(u.begin(), u.end(), kClampLogZero);
        u[static_cast<size_t>(label)] = 0.0;
    }

    // Orientation-resolved exp tables: index 0 = from-node is the lower edge
    // endpoint, 1 = the transpose direction.
    const ExpTable sp = exp_shifted(pots.scene_person);
    const ExpTable pp = exp_shifted(pots.person_person);
    const Mat sp_t = transpose(sp.e);
    const Mat pp_t = transpose(pp.e);

    auto table_for = [&](const Topology::Dir& d) -> std::pair<const Mat*, double> {
        const auto& ed = topo.edges[static_cast<size_t>(d.edge)];
        const bool scene_edge = ed.a == 0;
        const bool from_lower = d.from == ed.a;
        if (scene_edge) return {from_lower ? &sp.e : &sp_t, sp.shift};
        return {from_lower ? &pp.e : &pp_t, pp.shift};
    };

    auto alloc_msgs = [&] {
        std::vector<std::vector<double>> m(static_cast<size_t>(num_dir));
        for (int d = 0; d < num_dir; ++d)
            m[static_cast<size_t>(d)].assign(
                static_cast<size_t>(topo.card[static_cast<size_t>(topo.dir[static_cast<size_t>(d)].to)]), 0.0);
        return m;
    };

    run.msg.clear();
    run.msg.push_back(alloc_msgs());  // round 0: all-zero messages
    if (keep_trace) {
        run.h.resize(static_cast<size_t>(rounds));
        run.q.resize(static_cast<size_t>(rounds));
    }

    std::vector<double> h, q, v;
    for (int r = 1; r <= rounds; ++r) {
        const auto& prev = run.msg.back();
        auto cur = alloc_msgs();
        if (keep_trace) {
            run.h[static_cast<size_t>(r - 1)].resize(static_cast<size_t>(num_dir));
            run.q[static_cast<size_t>(r - 1)].resize(static_cast<size_t>(num_dir));
        }
        for (int d = 0; d < num_dir; ++d) {
            const auto& dd = topo.dir[static_cast<size_t>(d)];
            const int cf = topo.card[static_cast<size_t>(dd.from)];
            const int ct = topo.card[static_cast<size_t>(dd.to)];

            // h = unary(from) + sum of previous-round messages into `from`
            // except the one coming back from `to`.
            h.assign(run.unary[static_cast<size_t>(dd.from)].begin(),
                     run.unary[static_cast<size_t>(dd.from)].end());
            for (int in : topo.in_of[static_cast<size_t>(dd.from)]) {
                if (topo.dir[static_cast<size_t>(in)].from == dd.to) continue;
                const auto& mv = prev[static_cast<size_t>(in)];
                for (int t = 0; t < cf; ++t) h[static_cast<size_t>(t)] += mv[static_cast<size_t>(t)];
            }

            // q(y_to) = LSE_{y_from}( psi + h ), evaluated through shifted
            // exponentials so arbitrarily large potentials stay finite.
            double hmax = kNegInf;
            for (double x : h) hmax = std::max(hmax, x);
            v.resize(static_cast<size_t>(cf));
            for (int t = 0; t < cf; ++t) v[static_cast<size_t>(t)] = std::exp(h[static_cast<size_t>(t)] - hmax);

            const auto [tab, shift] = table_for(dd);
            q.assign(static_cast<size_t>(ct), 0.0);
            for (int f = 0; f < cf; ++f) {
                const double vf = v[static_cast<size_t>(f)];
                if (vf == 0.0) continue;
                const double* row = &tab->a[static_cast<size_t>(f) * static_cast<size_t>(ct)];
                for (int t = 0; t < ct; ++t) q[static_cast<size_t>(t)] += row[t] * vf;
            }
            for (int t = 0; t < ct; ++t)
                q[static_cast<size_t>(t)] =
                    q[static_cast<size_t>(t)] > 0.0 ? hmax + shift + std::log(q[static_cast<size_t>(t)]) : kNegInf;

            // log-normalize, then damp against the previous round.
            const double z = log_sum_exp(q);
            auto& out = cur[static_cast<size_t>(d)];
            if (std::isfinite(z)) {
                for (int t = 0; t < ct; ++t) out[static_cast<size_t>(t)] = q[static_cast<size_t>(t)] - z;
            } else {
                std::fill(out.begin(), out.end(), 0.0);
            }
            if (damping != 0.0) {
                const auto& old = prev[static_cast<size_t>(d)];
                for (int t = 0; t < ct; ++t)
                    out[static_cast<size_t>(t)] =
                        (1.0 - damping) * out[static_cast<size_t>(t)] + damping * old[static_cast<size_t>(t)];
            }
            if (keep_trace) {
                run.h[static_cast<size_t>(r - 1)][static_cast<size_t>(d)] = h;
                run.q[static_cast<size_t>(r - 1)][static_cast<size_t>(d)] = q;
            }
        }
        run.msg.push_back(std::move(cur));
        if (!keep_trace && run.msg.size() > 2) run.msg.erase(run.msg.begin());
    }

    // Beliefs.
    const auto& last = run.msg.back();
    run.belief_log.resize(static_cast<size_t>(topo.num_nodes));
    run.belief.resize(static_cast<size_t>(topo.num_nodes));
    for (int n = 0; n < topo.num_nodes; ++n) {
        auto s = run.unary[static_cast<size_t>(n)];
        for (int in : topo.in_of[static_cast<size_t>(n)]) {
            const auto& mv = last[static_cast<size_t>(in)];
            for (size_t t = 0; t < s.size(); ++t) s[t] += mv[t];
        }
        run.belief_log[static_cast<size_t>(n)] = s;
        softmax_inplace(s);
        run.belief[static_cast<size_t>(n)] = std::move(s);
    }
    return run;
}

BpGrad bp_backward(const SceneGraph& g, const PotentialTables& pots, const BpRun& run,
                   const std::vector<std::vector<double>>& d_belief_log, int rounds,
                   double damping) {
    const Topology& topo = run.topo;
    const int num_dir = static_cast<int>(topo.dir.size());

    BpGrad grad;
    grad.d_unary.resize(static_cast<size_t>(topo.num_nodes));
    for (int n = 0; n < topo.num_nodes; ++n)
        grad.d_unary[static_cast<size_t>(n)].assign(static_cast<size_t>(topo.card[static_cast<size_t>(n)]), 0.0);
    grad.d_scene_person = Mat(pots.scene_person.rows, pots.scene_person.cols);
    grad.d_person_person = Mat(pots.person_person.rows, pots.person_person.cols);

    // Adjoint accumulation for one pairwise entry, respecting the direction
    // the table was read in during the forward pass.
    auto add_table_grad = [&](const Topology::Dir& dd, int y_from, int y_to, double val) {
        const auto& ed = topo.edges[static_cast<size_t>(dd.edge)];
        const bool scene_edge = ed.a == 0;
        const bool from_lower = dd.from == ed.a;
        Mat& target = scene_edge ? grad.d_scene_person : grad.d_person_person;
        if (from_lower)
            target(y_from, y_to) += val;
        else
            target(y_to, y_from) += val;
    };

    auto psi_at = [&](const Topology::Dir& dd, int y_from, int y_to) -> double {
        const auto& ed = topo.edges[static_cast<size_t>(dd.edge)];
        const bool scene_edge = ed.a == 0;
        const bool from_lower = dd.from == ed.a;
        const Mat& tab = scene_edge ? pots.scene_person : pots.person_person;
        return from_lower ? tab(y_from, y_to) : tab(y_to, y_from);
    };

    // dmsg[r][d]: adjoint of the message emitted at round r.
    std::vector<std::vector<std::vector<double>>> dmsg(static_cast<size_t>(rounds) + 1);
    for (int r = 0; r <= rounds; ++r) {
        dmsg[static_cast<size_t>(r)].resize(static_cast<size_t>(num_dir));
        for (int d = 0; d < num_dir; ++d)
            dmsg[static_cast<size_t>(r)][static_cast<size_t>(d)].assign(
                static_cast<size_t>(topo.card[static_cast<size_t>(topo.dir[static_cast<size_t>(d)].to)]), 0.0);
    }

    // Seed: belief_log(n) = unary(n) + sum of final-round incoming messages.
    for (int n = 0; n < topo.num_nodes; ++n) {
        const auto& dn = d_belief_log[static_cast<size_t>(n)];
        bool any = false;
        for (double x : dn)
            if (x != 0.0) any = true;
        if (!any) continue;
        auto& du = grad.d_unary[static_cast<size_t>(n)];
        for (size_t t = 0; t < dn.size(); ++t) du[t] += dn[t];
        for (int in : topo.in_of[static_cast<size_t>(n)]) {
            auto& dm = dmsg[static_cast<size_t>(rounds)][static_cast<size_t>(in)];
            for (size_t t = 0; t < dn.size(); ++t) dm[t] += dn[t];
        }
    }

    std::vector<double> dmhat, dq, dh, p;
    for (int r = rounds; r >= 1; --r) {
        for (int d = 0; d < num_dir; ++d) {
            const auto& gmsg = dmsg[static_cast<size_t>(r)][static_cast<size_t>(d)];
            bool any = false;
            for (double x : gmsg)
                if (x != 0.0) any = true;
            if (!any) continue;

            const auto& dd = topo.dir[static_cast<size_t>(d)];
            const int cf = topo.card[static_cast<size_t>(dd.from)];
            const int ct = topo.card[static_cast<size_t>(dd.to)];
            const auto& qv = run.q[static_cast<size_t>(r - 1)][static_cast<size_t>(d)];
            const auto& hv = run.h[static_cast<size_t>(r - 1)][static_cast<size_t>(d)];

            // Damping blend.
            dmhat.assign(gmsg.begin(), gmsg.end());
            if (damping != 0.0) {
                auto& dprev = dmsg[static_cast<size_t>(r - 1)][static_cast<size_t>(d)];
                for (int t = 0; t < ct; ++t) {
                    dprev[static_cast<size_t>(t)] += damping * gmsg[static_cast<size_t>(t)];
                    dmhat[static_cast<size_t>(t)] *= (1.0 - damping);
                }
            }

            // Normalization: mhat = q - LSE(q).
            const double z = log_sum_exp(qv);
            dq.assign(static_cast<size_t>(ct), 0.0);
            if (std::isfinite(z)) {
                double gsum = 0.0;
                for (double x : dmhat) gsum += x;
                p.resize(static_cast<size_t>(ct));
                for (int t = 0; t < ct; ++t)
                    p[static_cast<size_t>(t)] = std::exp(qv[static_cast<size_t>(t)] - z);
                for (int t = 0; t < ct; ++t)
                    dq[static_cast<size_t>(t)] = dmhat[static_cast<size_t>(t)] - p[static_cast<size_t>(t)] * gsum;
            }

            // q(y_to) = LSE_{y_from}(psi + h): softmax weights over y_from.
            dh.assign(static_cast<size_t>(cf), 0.0);
            for (int t = 0; t < ct; ++t) {
                const double dqt = dq[static_cast<size_t>(t)];
                if (dqt == 0.0 || !std::isfinite(qv[static_cast<size_t>(t)])) continue;
                for (int f = 0; f < cf; ++f) {
                    const double w =
                        std::exp(psi_at(dd, f, t) + hv[static_cast<size_t>(f)] - qv[static_cast<size_t>(t)]);
                    if (w == 0.0) continue;
                    const double val = dqt * w;
                    add_table_grad(dd, f, t, val);
                    dh[static_cast<size_t>(f)] += val;
                }
            }

            // h = unary(from) + sum of previous-round messages into `from`
            // except the one from `to`.
            auto& du = grad.d_unary[static_cast<size_t>(dd.from)];
            for (int f = 0; f < cf; ++f) du[static_cast<size_t>(f)] += dh[static_cast<size_t>(f)];
            for (int in : topo.in_of[static_cast<size_t>(dd.from)]) {
                if (topo.dir[static_cast<size_t>(in)].from == dd.to) continue;
                auto& dprev = dmsg[static_cast<size_t>(r - 1)][static_cast<size_t>(in)];
                for (int f = 0; f < cf; ++f) dprev[static_cast<size_t>(f)] += dh[static_cast<size_t>(f)];
            }
        }
    }
    (void)g;
    return grad;
}

}  // namespace eeral::detail
