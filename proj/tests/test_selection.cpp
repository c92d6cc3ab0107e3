#include <doctest.h>

#include <cmath>

#include "eeral/joint_oracle.hpp"
#include "eeral/model.hpp"
#include "eeral/selection.hpp"
#include "eeral/synthgen.hpp"

using namespace eeral;

namespace {

PotentialTables zero_potentials(int n, int ts, int ta) {
    PotentialTables p;
    p.scene_unary.assign(static_cast<size_t>(ts), 0.0);
    p.person_unary.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(ta), 0.0));
    p.scene_person = Mat(ts, ta);
    p.person_person = Mat(ta, ta);
    return p;
}

SceneGraph pair_graph(const std::string& id = "p") {
    return SceneGraph(id, {1.0, 0.0}, {{0.0, 1.0}});
}

// scene + one person, both binary, joined by a strong diagonal table:
// observing either node pins the other.
PotentialTables correlated_pair(double scene0_mass) {
    PotentialTables p = zero_potentials(1, 2, 2);
    p.scene_person(0, 0) = 12.0;
    p.scene_person(1, 1) = 12.0;
    p.scene_unary[0] = std::log(scene0_mass);
    p.scene_unary[1] = std::log(1.0 - scene0_mass);
    return p;
}

AnnotationPool pool_for(const SceneGraph& g, int ts, int ta) {
    LabelSpace space;
    space.num_activities = ts;
    space.num_actions = ta;
    AnnotationPool pool(space);
    pool.add_graph(g.id(), g.num_nodes());
    return pool;
}

InferenceConfig exact_cfg() {
    InferenceConfig cfg;
    cfg.backend = Backend::ExactEnumeration;
    return cfg;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("clamped average entropy on a decoupled graph never moves other nodes") {
    Rng rng(3);
    const SceneGraph g("d", {0.5, 0.5}, {{0.1, 0.2}, {0.3, 0.4}});
    PotentialTables pots = zero_potentials(2, 3, 3);
    for (double& x : pots.scene_unary) x = rng.uniform_in(-1, 1);
    for (auto& u : pots.person_unary)
        for (double& x : u) x = rng.uniform_in(-1, 1);

    const InferenceConfig cfg = exact_cfg();
    const Marginals base = infer(g, pots, {}, cfg);
    double others = 0.0;
    for (int n = 0; n < 3; ++n)
        if (n != 1) others += node_entropy(base.dist[static_cast<size_t>(n)]);
    for (int j = 0; j < 3; ++j)
        CHECK(clamped_average_entropy(g, pots, {}, 1, j, cfg) ==
              doctest::Approx(others / 3.0).epsilon(1e-12));

    CHECK_THROWS(clamped_average_entropy(g, pots, {{1, 0}}, 1, 0, cfg));
}

TEST_CASE("perfectly correlated pair: observation kills all entropy") {
    const SceneGraph g = pair_graph();
    const PotentialTables pots = correlated_pair(0.5);
    for (int j = 0; j < 2; ++j)
        CHECK(clamped_average_entropy(g, pots, {}, 1, j, exact_cfg()) < 1e-3);
}

TEST_CASE("EER closed forms: decoupled and perfectly-correlated") {
    // decoupled: phi_i = H_i / (N+1)
    const SceneGraph g("d", {0.5, 0.5}, {{0.1, 0.2}, {0.3, 0.4}});
    PotentialTables pots = zero_potentials(2, 3, 3);
    pots.scene_unary = {0.9, -0.2, 0.1};
    pots.person_unary[0] = {0.5, 0.0, -0.5};
    const InferenceConfig cfg = exact_cfg();
    const Marginals base = infer(g, pots, {}, cfg);
    for (int node = 0; node < 3; ++node)
        CHECK(expected_entropy_reduction(g, pots, {}, node, cfg) ==
              doctest::Approx(node_entropy(base.dist[static_cast<size_t>(node)]) / 3.0)
                  .epsilon(1e-10));

    // correlated uniform pair: H-bar = ln 2, expected clamped entropy ~ 0
    const SceneGraph gp = pair_graph();
    const PotentialTables cp = correlated_pair(0.5);
    CHECK(expected_entropy_reduction(gp, cp, {}, 1, exact_cfg()) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("EER equals the joint-table reference on random instances") {
    Rng rng(41);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = rng.uniform_int(1, 3);
        std::vector<std::vector<double>> pf(static_cast<size_t>(n), {0.0, 1.0});
        const SceneGraph g("r" + std::to_string(trial), {1.0, 0.0}, pf);
        PotentialTables pots = zero_potentials(n, 3, 3);
        for (double& x : pots.scene_unary) x = rng.uniform_in(-1.5, 1.5);
        for (auto& u : pots.person_unary)
            for (double& x : u) x = rng.uniform_in(-1.5, 1.5);
        for (double& x : pots.scene_person.a) x = rng.uniform_in(-1.5, 1.5);
        for (int u = 0; u < 3; ++u)
            for (int v = u; v < 3; ++v) {
                const double x = rng.uniform_in(-1.5, 1.5);
                pots.person_person(u, v) = x;
                pots.person_person(v, u) = x;
            }
        for (int node = 0; node <= n; ++node)
            CHECK(expected_entropy_reduction(g, pots, {}, node, exact_cfg()) ==
                  doctest::Approx(oracle::expected_entropy_reduction(g, pots, {}, node))
                      .epsilon(1e-10));
    }
}

TEST_CASE("score_eer covers exactly the unlabeled nodes") {
    const SceneGraph g = pair_graph();
    const PotentialTables pots = correlated_pair(0.5);
    AnnotationPool pool = pool_for(g, 2, 2);
    commit_labels(pool, {{{g.id(), 0}, 1}});  // only the person stays unlabeled

    std::vector<SceneGraph> graphs{g};
    const auto scores =
        score_eer(graphs, [&](const SceneGraph&) { return pots; }, pool, exact_cfg());
    REQUIRE(scores.entries.size() == 1);
    CHECK(scores.entries[0].node.node_index == 1);
}

TEST_CASE("identical graphs with identical pools get identical scores") {
    GenConfig cfg = collective_like_preset();
    cfg.num_graphs = 2;
    cfg.test_fraction = 0.0;
    cfg.initial_labeled_fraction = 0.2;
    cfg.rng_seed = 13;
    Dataset ds = generate(cfg);
    // overwrite the second graph with a copy of the first, empty pool
    AnnotationPool pool(ds.label_space);
    std::vector<std::vector<double>> pf;
    for (int p = 0; p < ds.train_graphs[0].num_persons(); ++p)
        pf.push_back(ds.train_graphs[0].person_feature(p));
    std::vector<SceneGraph> graphs;
    graphs.emplace_back("a", ds.train_graphs[0].scene_feature(), pf);
    graphs.emplace_back("b", ds.train_graphs[0].scene_feature(), pf);
    pool.add_graph("a", graphs[0].num_nodes());
    pool.add_graph("b", graphs[1].num_nodes());

    PotentialTables pots = zero_potentials(graphs[0].num_persons(), ds.label_space.num_activities,
                                           ds.label_space.num_actions);
    InferenceConfig icfg;
    icfg.rounds = 4;
    const auto scores = score_eer(graphs, [&](const SceneGraph&) { return pots; }, pool, icfg);
    const size_t half = scores.entries.size() / 2;
    for (size_t i = 0; i < half; ++i)
        CHECK(scores.entries[i].score == scores.entries[half + i].score);
}

TEST_CASE("compositional: sweep scores equal per-node calls, serial equals parallel") {
    GenConfig gcfg = collective_like_preset();
    gcfg.num_graphs = 3;
    gcfg.test_fraction = 0.0;
    gcfg.persons_min = 2;
    gcfg.persons_max = 3;
    gcfg.initial_labeled_fraction = 0.25;
    gcfg.rng_seed = 29;
    const Dataset ds = generate(gcfg);
    const ModelParams params =
        ModelParams::random_init(ds.label_space, gcfg.scene_dim, gcfg.person_dim, 0.3, 31);
    const PotentialsFn fn = [&](const SceneGraph& g) { return unary_logits(params, g); };
    InferenceConfig icfg;
    icfg.rounds = 5;

    const auto par = score_eer(ds.train_graphs, fn, ds.pool, icfg);
    const auto ser = serial::score_eer(ds.train_graphs, fn, ds.pool, icfg);
    REQUIRE(par.entries.size() == ser.entries.size());
    for (size_t i = 0; i < par.entries.size(); ++i) {
        CHECK(par.entries[i].node == ser.entries[i].node);
        CHECK(par.entries[i].score == ser.entries[i].score);  // bitwise
        // and both equal the standalone per-node operation
        const auto& e = par.entries[i];
        const SceneGraph* g = nullptr;
        for (const auto& cand : ds.train_graphs)
            if (cand.id() == e.node.graph_id) g = &cand;
        REQUIRE(g != nullptr);
        ClampSet base;
        for (const auto& [node, label] : ds.pool.labeled_in_graph(g->id())) base[node] = label;
        CHECK(e.score ==
              expected_entropy_reduction(*g, fn(*g), base, e.node.node_index, icfg));
    }

    const auto ec_par = score_expected_change(ds.train_graphs, fn, ds.pool, icfg);
    const auto ec_ser = serial::score_expected_change(ds.train_graphs, fn, ds.pool, icfg);
    REQUIRE(ec_par.entries.size() == ec_ser.entries.size());
    for (size_t i = 0; i < ec_par.entries.size(); ++i)
        CHECK(ec_par.entries[i].score == ec_ser.entries[i].score);
}

TEST_CASE("entropy baseline: uniform beats near-delta, uniform T=4 scores ln 4") {
    // one graph, two persons: one uniform, one near-delta
    SceneGraph g("s", {1.0, 0.0}, {{0.0, 1.0}, {1.0, 1.0}});
    PotentialTables pots = zero_potentials(2, 2, 4);
    pots.person_unary[1] = {9.0, 0.0, 0.0, 0.0};  // near-delta
    AnnotationPool pool = pool_for(g, 2, 4);
    commit_labels(pool, {{{g.id(), 0}, 0}});  // take the scene out of the pool

    std::vector<SceneGraph> graphs{g};
    const auto scores =
        score_entropy(graphs, [&](const SceneGraph&) { return pots; }, pool, exact_cfg());
    REQUIRE(scores.entries.size() == 2);
    CHECK(scores.entries[0].score > scores.entries[1].score);
    CHECK(scores.entries[0].score == doctest::Approx(std::log(4.0)).epsilon(1e-9));

    // direct re-computation from the clamped marginals
    ClampSet base{{0, 0}};
    const Marginals m = infer(g, pots, base, exact_cfg());
    CHECK(scores.entries[1].score == doctest::Approx(node_entropy(m.dist[2])).epsilon(1e-12));
}

TEST_CASE("least-confidence baseline closed forms") {
    SceneGraph g("s", {1.0, 0.0}, {{0.0, 1.0}, {1.0, 1.0}});
    PotentialTables pots = zero_potentials(2, 2, 5);
    pots.person_unary[0] = {std::log(0.9), std::log(0.1), -40.0, -40.0, -40.0};
    AnnotationPool pool = pool_for(g, 2, 5);
    commit_labels(pool, {{{g.id(), 0}, 0}});

    std::vector<SceneGraph> graphs{g};
    const auto scores = score_least_confidence(
        graphs, [&](const SceneGraph&) { return pots; }, pool, exact_cfg());
    REQUIRE(scores.entries.size() == 2);
    CHECK(scores.entries[0].score == doctest::Approx(0.1).epsilon(1e-9));   // [0.9, 0.1, ~0...]
    CHECK(scores.entries[1].score == doctest::Approx(0.8).epsilon(1e-9));   // uniform over 5

    // sort-based oracle on a random vector
    Rng rng(59);
    std::vector<double> d(5);
    double s = 0.0;
    for (double& x : d) {
        x = rng.uniform() + 0.05;
        s += x;
    }
    PotentialTables pr = zero_potentials(1, 2, 5);
    for (int t = 0; t < 5; ++t) pr.person_unary[0][static_cast<size_t>(t)] = std::log(d[static_cast<size_t>(t)] / s);
    SceneGraph g1("r", {1.0, 0.0}, {{0.0, 1.0}});
    AnnotationPool pool1 = pool_for(g1, 2, 5);
    commit_labels(pool1, {{{g1.id(), 0}, 0}});
    std::vector<SceneGraph> graphs1{g1};
    const auto sc = score_least_confidence(
        graphs1, [&](const SceneGraph&) { return pr; }, pool1, exact_cfg());
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sc.entries[0].score == doctest::Approx(1.0 - sorted.back() / s).epsilon(1e-9));
}

TEST_CASE("margin baseline closed forms") {
    SceneGraph g("s", {1.0, 0.0}, {{0.0, 1.0}, {1.0, 1.0}});
    PotentialTables pots = zero_potentials(2, 2, 3);
    pots.person_unary[0] = {0.0, 0.0, -40.0};                                 // [.5, .5, ~0]
    pots.person_unary[1] = {std::log(0.7), std::log(0.2), std::log(0.1)};     // [.7, .2, .1]
    AnnotationPool pool = pool_for(g, 2, 3);
    commit_labels(pool, {{{g.id(), 0}, 0}});

    std::vector<SceneGraph> graphs{g};
    const auto scores =
        score_margin(graphs, [&](const SceneGraph&) { return pots; }, pool, exact_cfg());
    REQUIRE(scores.entries.size() == 2);
    CHECK(scores.entries[0].score == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(scores.entries[1].score == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(scores.entries[0].score > scores.entries[1].score);  // tie is more informative
}

TEST_CASE("expected-change baseline: decoupled graphs score zero") {
    Rng rng(67);
    const SceneGraph g("d", {0.5, 0.5}, {{0.1, 0.2}, {0.3, 0.4}});
    PotentialTables pots = zero_potentials(2, 3, 3);
    for (double& x : pots.scene_unary) x = rng.uniform_in(-1, 1);
    for (auto& u : pots.person_unary)
        for (double& x : u) x = rng.uniform_in(-1, 1);
    AnnotationPool pool = pool_for(g, 3, 3);
    std::vector<SceneGraph> graphs{g};
    const auto scores = score_expected_change(
        graphs, [&](const SceneGraph&) { return pots; }, pool, exact_cfg());
    for (const auto& e : scores.entries) CHECK(e.score == 0.0);
}

TEST_CASE("expected-change baseline: correlated pair closed form 0.4") {
    const SceneGraph g = pair_graph();
    const PotentialTables pots = correlated_pair(0.6);
    AnnotationPool pool = pool_for(g, 2, 2);
    std::vector<SceneGraph> graphs{g};
    const auto scores = score_expected_change(
        graphs, [&](const SceneGraph&) { return pots; }, pool, exact_cfg());
    REQUIRE(scores.entries.size() == 2);
    CHECK(scores.entries[0].score == doctest::Approx(0.4).epsilon(1e-3));
    CHECK(scores.entries[1].score == doctest::Approx(0.4).epsilon(1e-3));
}

TEST_CASE("expected-change matches a joint-table flip count") {
    Rng rng(73);
    const SceneGraph g("e", {1.0, 0.0}, {{0.0, 1.0}, {1.0, 0.5}});
    PotentialTables pots = zero_potentials(2, 2, 2);
    for (double& x : pots.scene_unary) x = rng.uniform_in(-1, 1);
    for (auto& u : pots.person_unary)
        for (double& x : u) x = rng.uniform_in(-1, 1);
    for (double& x : pots.scene_person.a) x = rng.uniform_in(-1.5, 1.5);
    for (int u = 0; u < 2; ++u)
        for (int v = u; v < 2; ++v) {
            const double x = rng.uniform_in(-1.5, 1.5);
            pots.person_person(u, v) = x;
            pots.person_person(v, u) = x;
        }
    AnnotationPool pool = pool_for(g, 2, 2);
    std::vector<SceneGraph> graphs{g};
    const auto scores = score_expected_change(
        graphs, [&](const SceneGraph&) { return pots; }, pool, exact_cfg());

    auto argmax = [](const std::vector<double>& v) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(v.size()); ++i)
            if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
        return best;
    };
    const auto base = oracle::node_marginals(oracle::joint_table(g, pots, {}));
    for (const auto& e : scores.entries) {
        const int i = e.node.node_index;
        double expect = 0.0;
        for (int j = 0; j < 2; ++j) {
            const auto cond = oracle::node_marginals(oracle::joint_table(g, pots, {{i, j}}));
            int flips = 0;
            for (int n = 0; n < 3; ++n)
                if (n != i && argmax(cond[static_cast<size_t>(n)]) != argmax(base[static_cast<size_t>(n)])) ++flips;
            expect += base[static_cast<size_t>(i)][static_cast<size_t>(j)] * flips;
        }
        CHECK(e.score == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("random baseline is seed-deterministic") {
    GenConfig cfg = collective_like_preset();
    cfg.num_graphs = 4;
    cfg.test_fraction = 0.0;
    cfg.initial_labeled_fraction = 0.3;
    cfg.rng_seed = 83;
    const Dataset ds = generate(cfg);

    const auto a = score_random(ds.pool, 42);
    const auto b = score_random(ds.pool, 42);
    REQUIRE(a.entries.size() == ds.pool.unlabeled_count());
    for (size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].score == b.entries[i].score);

    const auto c = score_random(ds.pool, 43);
    bool any_diff = false;
    for (size_t i = 0; i < a.entries.size(); ++i)
        if (a.entries[i].score != c.entries[i].score) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("no strategy ever scores a labeled node") {
    GenConfig cfg = collective_like_preset();
    cfg.num_graphs = 4;
    cfg.test_fraction = 0.0;
    cfg.persons_min = 2;
    cfg.persons_max = 3;
    cfg.initial_labeled_fraction = 0.4;
    cfg.rng_seed = 89;
    const Dataset ds = generate(cfg);
    const ModelParams params =
        ModelParams::random_init(ds.label_space, cfg.scene_dim, cfg.person_dim, 0.2, 3);
    const PotentialsFn fn = [&](const SceneGraph& g) { return unary_logits(params, g); };
    InferenceConfig icfg;
    icfg.rounds = 3;
    for (Strategy s : {Strategy::EER, Strategy::SA, Strategy::LC, Strategy::Margin, Strategy::EC,
                       Strategy::Random}) {
        const auto scores = compute_scores(s, ds.train_graphs, fn, ds.pool, icfg, 7);
        CHECK(scores.entries.size() == ds.pool.unlabeled_count());
        for (const auto& e : scores.entries) CHECK_FALSE(ds.pool.is_labeled(e.node));
    }
}

TEST_CASE("top_k ordering, tie-break and truncation") {
    SelectionScore s;
    s.strategy = Strategy::EER;
    s.entries = {{{"g1", 0}, 0.5}, {{"g1", 1}, 0.2}, {{"g2", 0}, 0.4}};
    const Selection sel = top_k(s, 2, 3);
    REQUIRE(sel.chosen.size() == 2);
    CHECK(sel.iteration == 3);
    CHECK(sel.chosen[0].node == NodeRef{"g1", 0});
    CHECK(sel.chosen[1].node == NodeRef{"g2", 0});

    SelectionScore ties;
    ties.entries = {{{"b", 2}, 1.0}, {{"a", 5}, 1.0}, {{"a", 1}, 1.0}};
    const Selection t2 = top_k(ties, 2);
    CHECK(t2.chosen[0].node == NodeRef{"a", 1});
    CHECK(t2.chosen[1].node == NodeRef{"a", 5});

    CHECK(top_k(s, 100).chosen.size() == 3);  // k > |U| returns all of U
    CHECK_THROWS(top_k(s, 0));
}

TEST_CASE("top_k at benchmark scale: 1000 out of 35400") {
    SelectionScore s;
    Rng rng(97);
    s.entries.reserve(35400);
    for (int i = 0; i < 35400; ++i)
        s.entries.push_back({{"g" + std::to_string(i / 13), i % 13}, rng.uniform()});
    const Selection sel = top_k(s, 1000);
    CHECK(sel.chosen.size() == 1000);
    for (size_t i = 1; i < sel.chosen.size(); ++i)
        CHECK(sel.chosen[i - 1].score >= sel.chosen[i].score);
}

TEST_CASE("ranking is invariant under positive scaling of scores") {
    Rng rng(101);
    SelectionScore s;
    for (int i = 0; i < 50; ++i) s.entries.push_back({{"g", i}, rng.uniform()});
    SelectionScore scaled = s;
    for (auto& e : scaled.entries) e.score *= 7.3;
    const Selection a = top_k(s, 10);
    const Selection b = top_k(scaled, 10);
    for (size_t i = 0; i < a.chosen.size(); ++i) CHECK(a.chosen[i].node == b.chosen[i].node);
}

}  // TEST_SUITE
