#include "eeral/verify.hpp"

#include <chrono>
#include <cmath>

#include "eeral/joint_oracle.hpp"
#include "eeral/model.hpp"
#include "eeral/selection.hpp"

namespace eeral {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

SceneGraph random_graph(Rng& rng, int n, int scene_dim, int person_dim) {
    std::vector<double> sf(static_cast<size_t>(scene_dim));
    for (double& x : sf) x = rng.uniform_in(-1.0, 1.0);
    std::vector<std::vector<double>> pf(static_cast<size_t>(n));
    for (auto& f : pf) {
        f.resize(static_cast<size_t>(person_dim));
        for (double& x : f) x = rng.uniform_in(-1.0, 1.0);
    }
    return SceneGraph("v" + std::to_string(rng.uniform_int(0, 1 << 30)), std::move(sf),
                      std::move(pf));
}

PotentialTables random_potentials(Rng& rng, int n, int ts, int ta, double scale,
                                  bool zero_person_person) {
    PotentialTables pots;
    pots.scene_unary.resize(static_cast<size_t>(ts));
    for (double& x : pots.scene_unary) x = rng.uniform_in(-scale, scale);
    pots.person_unary.resize(static_cast<size_t>(n));
    for (auto& u : pots.person_unary) {
        u.resize(static_cast<size_t>(ta));
        for (double& x : u) x = rng.uniform_in(-scale, scale);
    }
    pots.scene_person = Mat(ts, ta);
    for (double& x : pots.scene_person.a) x = rng.uniform_in(-scale, scale);
    pots.person_person = Mat(ta, ta);
    if (!zero_person_person) {
        // symmetric, matching how model-produced tables are used
        for (int u = 0; u < ta; ++u)
            for (int v = u; v < ta; ++v) {
                const double x = rng.uniform_in(-scale, scale);
                pots.person_person(u, v) = x;
                pots.person_person(v, u) = x;
            }
    }
    return pots;
}

double max_l1_gap(const Marginals& a, const Marginals& b) {
    double worst = 0.0;
    for (size_t n = 0; n < a.dist.size(); ++n) {
        double l1 = 0.0;
        for (size_t t = 0; t < a.dist[n].size(); ++t)
            l1 += std::fabs(a.dist[n][t] - b.dist[n][t]);
        worst = std::max(worst, l1);
    }
    return worst;
}

}  // namespace

SuiteResult verify_bp_tree(const VerifyOptions& opt) {
    const auto start = clock_type::now();
    const int trials = opt.trials > 0 ? opt.trials : 200;
    Rng rng(mix_seed(opt.seed, 0xB7));

    SuiteResult res;
    res.name = "bp_tree_max_l1";
    res.trials = trials;
    res.tolerance = 1e-9;

    InferenceConfig sp;
    sp.backend = Backend::SumProduct;
    sp.rounds = 4;
    InferenceConfig exact;
    exact.backend = Backend::ExactEnumeration;

    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const int ts = rng.uniform_int(2, 4);
        const int ta = rng.uniform_int(2, 4);
        const SceneGraph g = random_graph(rng, n, 2, 2);
        const PotentialTables pots =
            random_potentials(rng, n, ts, ta, 1.5, /*zero_person_person=*/true);
        ClampSet clamps;
        if (rng.uniform() < 0.5) clamps[rng.uniform_int(0, n)] =
            0;  // clamp some node to label 0 half the time
        const Marginals a = infer(g, pots, clamps, sp);
        const Marginals b = infer(g, pots, clamps, exact);
        worst = std::max(worst, max_l1_gap(a, b));
    }
    if (opt.inject_fault) worst += 1.0;
    res.value = worst;
    res.pass = worst <= res.tolerance;
    res.seconds = seconds_since(start);
    return res;
}

SuiteResult verify_gradient(const VerifyOptions& opt) {
    const auto start = clock_type::now();
    const int trials = opt.trials > 0 ? opt.trials : 50;
    Rng rng(mix_seed(opt.seed, 0x9d));

    SuiteResult res;
    res.name = "grad_max_rel_err";
    res.trials = trials;
    res.tolerance = 1e-4;

    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        LabelSpace space;
        space.num_activities = rng.uniform_int(2, 3);
        space.num_actions = rng.uniform_int(2, 3);
        const int scene_dim = rng.uniform_int(2, 3);
        const int person_dim = rng.uniform_int(2, 3);
        const int n = rng.uniform_int(1, 3);

        ModelParams params = ModelParams::random_init(space, scene_dim, person_dim, 0.6,
                                                      rng.raw());
        std::vector<SceneGraph> graphs;
        graphs.push_back(random_graph(rng, n, scene_dim, person_dim));

        AnnotationPool pool(space);
        pool.add_graph(graphs[0].id(), n + 1);
        std::vector<std::pair<NodeRef, int>> answers;
        for (int node = 0; node <= n; ++node) {
            if (node > 0 && rng.uniform() < 0.4) continue;  // partial labels
            const int card = node == 0 ? space.num_activities : space.num_actions;
            answers.push_back({NodeRef{graphs[0].id(), node}, rng.uniform_int(0, card - 1)});
        }
        commit_labels(pool, answers);

        InferenceConfig cfg;
        if (trial % 2 == 0) {
            cfg.backend = Backend::SumProduct;
            cfg.rounds = rng.uniform_int(2, 5);
            cfg.damping = (trial % 4 == 0) ? 0.3 : 0.0;
        } else {
            cfg.backend = Backend::ExactEnumeration;
        }

        const ModelGrad grad = loss_gradient(params, graphs, pool, cfg);

        const double h = 1e-4;
        auto check_block = [&](Mat ModelParams::*field) {
            Mat& m = params.*field;
            const Mat& gm = grad.*field;
            for (size_t i = 0; i < m.a.size(); ++i) {
                const double saved = m.a[i];
                m.a[i] = saved + h;
                const double up = loss(params, graphs, pool, cfg);
                m.a[i] = saved - h;
                const double down = loss(params, graphs, pool, cfg);
                m.a[i] = saved;
                const double fd = (up - down) / (2.0 * h);
                // denominator floor 1e-3 realizes the 1e-7 absolute floor at
                // the 1e-4 relative tolerance
                const double denom = std::max({std::fabs(fd), std::fabs(gm.a[i]), 1e-7 / 1e-4});
                worst = std::max(worst, std::fabs(fd - gm.a[i]) / denom);
            }
        };
        check_block(&ModelParams::w_scene);
        check_block(&ModelParams::w_action);
        check_block(&ModelParams::psi_sp);
        check_block(&ModelParams::psi_pp);
    }
    if (opt.inject_fault) worst += 1.0;
    res.value = worst;
    res.pass = worst <= res.tolerance;
    res.seconds = seconds_since(start);
    return res;
}

std::vector<SuiteResult> verify_eer(const VerifyOptions& opt) {
    const auto start = clock_type::now();
    const int trials = opt.trials > 0 ? opt.trials : 100;
    Rng rng(mix_seed(opt.seed, 0xEE));

    SuiteResult gap;
    gap.name = "eer_vs_joint_max_err";
    gap.trials = trials;
    gap.tolerance = 1e-8;

    SuiteResult mono;
    mono.name = "eer_min_phi";
    mono.trials = trials;
    mono.tolerance = -1e-10;
    mono.lower_bound = true;
    mono.value = std::numeric_limits<double>::max();

    SuiteResult closed;
    closed.name = "eer_decoupled_closed_form";
    closed.trials = trials;
    closed.tolerance = 1e-10;

    InferenceConfig exact;
    exact.backend = Backend::ExactEnumeration;

    for (int trial = 0; trial < trials; ++trial) {
        const int ts = rng.uniform_int(2, 4);
        const int ta = rng.uniform_int(2, 4);
        // keep ts * ta^n <= 1e5
        int n = rng.uniform_int(1, 5);
        while (std::pow(ta, n) * ts > 1e5) --n;
        const bool decoupled = trial % 3 == 0;

        const SceneGraph g = random_graph(rng, n, 2, 2);
        PotentialTables pots = random_potentials(rng, n, ts, ta, 1.5, decoupled);
        if (decoupled)  // decoupled means no pairwise interactions at all
            for (double& x : pots.scene_person.a) x = 0.0;

        AnnotationPool pool(LabelSpace{ts, ta, {}, {}});
        pool.add_graph(g.id(), n + 1);
        std::vector<std::pair<NodeRef, int>> labeled;
        for (int node = 0; node <= n; ++node)
            if (rng.uniform() < 0.25 && static_cast<int>(labeled.size()) < n)
                labeled.push_back({NodeRef{g.id(), node}, 0});
        commit_labels(pool, labeled);
        ClampSet base;
        for (const auto& [ref, lab] : labeled) base[ref.node_index] = lab;

        std::vector<SceneGraph> graphs{g};
        const SelectionScore scores =
            score_eer(graphs, [&](const SceneGraph&) { return pots; }, pool, exact);

        const Marginals base_marg = infer(g, pots, base, exact);
        for (const auto& e : scores.entries) {
            const double ref = oracle::expected_entropy_reduction(g, pots, base, e.node.node_index);
            gap.value = std::max(gap.value, std::fabs(ref - e.score));
            mono.value = std::min(mono.value, e.score);
            if (decoupled) {
                const double hi = node_entropy(base_marg.dist[static_cast<size_t>(e.node.node_index)]);
                closed.value =
                    std::max(closed.value, std::fabs(e.score - hi / static_cast<double>(n + 1)));
            }
        }
    }
    if (opt.inject_fault) {
        gap.value += 1.0;
        mono.value = -1.0;
        closed.value += 1.0;
    }
    gap.pass = gap.value <= gap.tolerance;
    mono.pass = mono.value >= mono.tolerance;
    closed.pass = closed.value <= closed.tolerance;
    const double elapsed = seconds_since(start);
    gap.seconds = mono.seconds = closed.seconds = elapsed;
    return {gap, mono, closed};
}

std::vector<SuiteResult> run_verify_suites(const std::string& which, const VerifyOptions& opt) {
    std::vector<SuiteResult> out;
    if (which == "all" || which == "bp") out.push_back(verify_bp_tree(opt));
    if (which == "all" || which == "grad") out.push_back(verify_gradient(opt));
    if (which == "all" || which == "eer") {
        auto eer = verify_eer(opt);
        out.insert(out.end(), eer.begin(), eer.end());
    }
    if (out.empty()) throw config_error("verify: unknown suite '" + which + "'");
    return out;
}

}  // namespace eeral
