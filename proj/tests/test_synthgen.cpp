#include <doctest.h>

#include <cmath>

#include "eeral/synthgen.hpp"

using namespace eeral;

TEST_SUITE("synthgen") {

TEST_CASE("generation is bit-deterministic") {
    GenConfig cfg = volleyball_like_preset();
    cfg.num_graphs = 20;
    cfg.rng_seed = 5;
    const Dataset a = generate(cfg);
    const Dataset b = generate(cfg);
    REQUIRE(a.train_graphs.size() == b.train_graphs.size());
    for (size_t i = 0; i < a.train_graphs.size(); ++i) {
        CHECK(a.train_graphs[i].id() == b.train_graphs[i].id());
        CHECK(a.train_graphs[i].scene_feature() == b.train_graphs[i].scene_feature());
        for (int p = 0; p < a.train_graphs[i].num_persons(); ++p)
            CHECK(a.train_graphs[i].person_feature(p) == b.train_graphs[i].person_feature(p));
    }
    CHECK(a.pool.labeled() == b.pool.labeled());
    for (const auto& [id, t] : a.truths) {
        CHECK(b.truths.at(id).scene_label == t.scene_label);
        CHECK(b.truths.at(id).action_labels == t.action_labels);
    }
}

TEST_CASE("volleyball-like imbalance: dominant action near 0.70") {
    GenConfig cfg = volleyball_like_preset();
    cfg.num_graphs = 500;
    cfg.rng_seed = 7;
    const Dataset ds = generate(cfg);
    size_t dominant = 0, total = 0, rare = 0;
    for (const auto& [id, t] : ds.truths) {
        for (int a : t.action_labels) {
            total += 1;
            if (a == 0) ++dominant;
            if (a == 1) ++rare;
        }
    }
    const double freq = static_cast<double>(dominant) / static_cast<double>(total);
    CHECK(freq > 0.67);
    CHECK(freq < 0.73);
    const double rare_freq = static_cast<double>(rare) / static_cast<double>(total);
    CHECK(rare_freq < 0.03);  // the 1% class stays rare
}

TEST_CASE("one-hot scene prior fixes every scene label") {
    GenConfig cfg = collective_like_preset();
    cfg.num_graphs = 30;
    cfg.scene_prior.assign(5, 0.0);
    cfg.scene_prior[3] = 1.0;
    const Dataset ds = generate(cfg);
    for (const auto& [id, t] : ds.truths) CHECK(t.scene_label == 3);
}

TEST_CASE("noiseless features sit on separable prototypes") {
    GenConfig cfg = collective_like_preset();
    cfg.num_graphs = 12;
    cfg.noise_sigma = 0.0;
    cfg.rng_seed = 9;
    const Dataset ds = generate(cfg);
    const Mat protos = class_prototypes(cfg.label_space.num_actions, cfg.person_dim,
                                        cfg.prototype_separation, mix_seed(cfg.rng_seed, 0xB0B));
    // nearest prototype (a linear classifier) recovers every action label
    auto nearest = [&](const std::vector<double>& f) {
        int best = 0;
        double best_d = 1e300;
        for (int r = 0; r < protos.rows; ++r) {
            double d = 0.0;
            for (int c = 0; c < protos.cols; ++c) {
                const double diff = f[static_cast<size_t>(c)] - protos(r, c);
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = r;
            }
        }
        return best;
    };
    for (const auto& g : ds.train_graphs) {
        const GroundTruth& t = ds.truths.at(g.id());
        for (int p = 0; p < g.num_persons(); ++p)
            CHECK(nearest(g.person_feature(p)) == t.action_labels[static_cast<size_t>(p)]);
    }
}

TEST_CASE("initial pool labels whole training graphs up to the node budget") {
    GenConfig cfg = volleyball_like_preset();
    cfg.num_graphs = 50;
    cfg.initial_labeled_fraction = 0.1;
    cfg.rng_seed = 21;
    const Dataset ds = generate(cfg);

    const size_t target = static_cast<size_t>(
        std::lround(0.1 * static_cast<double>(ds.train_node_count())));
    const size_t labeled = ds.pool.labeled_count();
    CHECK(labeled >= target);
    CHECK(labeled <= target + static_cast<size_t>(cfg.persons_max) + 1);  // graph-boundary rounding

    // labeled graphs are labeled completely, and only train graphs are known
    for (const auto& g : ds.train_graphs) {
        const auto in_graph = ds.pool.labeled_in_graph(g.id());
        CHECK((in_graph.empty() || static_cast<int>(in_graph.size()) == g.num_nodes()));
    }
    for (const auto& g : ds.test_graphs) CHECK_FALSE(ds.pool.has_graph(g.id()));
}

TEST_CASE("train/test split is 80/20 and disjoint") {
    GenConfig cfg = collective_like_preset();
    cfg.num_graphs = 50;
    const Dataset ds = generate(cfg);
    CHECK(ds.train_graphs.size() == 40);
    CHECK(ds.test_graphs.size() == 10);
    for (const auto& tr : ds.train_graphs)
        for (const auto& te : ds.test_graphs) CHECK(tr.id() != te.id());
}

TEST_CASE("prototype geometry") {
    const Mat m = class_prototypes(6, 8, 1.0, 3);
    for (int r = 0; r < m.rows; ++r) {
        double n = 0.0;
        for (int c = 0; c < m.cols; ++c) n += m(r, c) * m(r, c);
        CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (int a = 0; a < m.rows; ++a)
        for (int b = a + 1; b < m.rows; ++b) {
            double d = 0.0;
            for (int c = 0; c < m.cols; ++c) d += (m(a, c) - m(b, c)) * (m(a, c) - m(b, c));
            CHECK(std::sqrt(d) >= 1.0);
        }

    CHECK_THROWS_AS(class_prototypes(5, 2, 1.9, 3), config_error);  // infeasible
}

TEST_CASE("config validation") {
    GenConfig cfg = volleyball_like_preset();
    cfg.num_graphs = 0;
    CHECK_THROWS_AS(generate(cfg), config_error);
    cfg = volleyball_like_preset();
    cfg.scene_prior[0] += 0.5;
    CHECK_THROWS_AS(generate(cfg), config_error);
    cfg = volleyball_like_preset();
    cfg.initial_labeled_fraction = 0.0;
    CHECK_THROWS_AS(generate(cfg), config_error);
}

}  // TEST_SUITE
