#include "eeral/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace eeral {

void GenConfig::validate() const {
    label_space.validate();
    if (num_graphs < 1) throw config_error("gen: num_graphs must be >= 1");
    if (persons_min < 1 || persons_max < persons_min)
        throw config_error("gen: bad persons range");
    if (scene_dim < 1 || person_dim < 1) throw config_error("gen: feature dims must be positive");
    if (noise_sigma < 0.0) throw config_error("gen: noise_sigma must be >= 0");
    if (prototype_separation <= 0.0) throw config_error("gen: prototype_separation must be > 0");
    if (initial_labeled_fraction <= 0.0 || initial_labeled_fraction > 1.0)
        throw config_error("gen: initial_labeled_fraction must be in (0,1]");
    if (test_fraction < 0.0 || test_fraction >= 1.0)
        throw config_error("gen: test_fraction must be in [0,1)");
    if (static_cast<int>(scene_prior.size()) != label_space.num_activities)
        throw config_error("gen: scene_prior length mismatch");
    double s = std::accumulate(scene_prior.begin(), scene_prior.end(), 0.0);
    if (std::fabs(s - 1.0) > 1e-9) throw config_error("gen: scene_prior must sum to 1");
    for (double p : scene_prior)
        if (p < 0.0) throw config_error("gen: scene_prior has negative mass");
    if (action_given_scene.rows != label_space.num_activities ||
        action_given_scene.cols != label_space.num_actions)
        throw config_error("gen: action_given_scene shape mismatch");
    for (int r = 0; r < action_given_scene.rows; ++r) {
        double row = 0.0;
        for (int c = 0; c < action_given_scene.cols; ++c) {
            if (action_given_scene(r, c) < 0.0)
                throw config_error("gen: action_given_scene has negative mass");
            row += action_given_scene(r, c);
        }
        if (std::fabs(row - 1.0) > 1e-9)
            throw config_error("gen: action_given_scene row " + std::to_string(r) +
                               " must sum to 1");
    }
}

namespace {

void normalize_unit(std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) throw numerical_error("prototype: zero vector");
    for (double& x : v) x /= n;
}

double pair_distance(const Mat& m, int a, int b) {
    double d = 0.0;
    for (int c = 0; c < m.cols; ++c) {
        const double diff = m(a, c) - m(b, c);
        d += diff * diff;
    }
    return std::sqrt(d);
}

}  // namespace

Mat class_prototypes(int count, int dim, double min_separation, std::uint64_t seed) {
    if (count < 1 || dim < 1) throw config_error("prototypes: bad count/dim");
    Rng rng(seed);
    const double kOrthoDist = std::sqrt(2.0);

    if (count == 2 && min_separation > kOrthoDist && min_separation <= 2.0) {
        // Antipodal pair reaches distance 2, the most two unit vectors allow.
        Mat m(2, dim);
        std::vector<double> v(static_cast<size_t>(dim));
        for (double& x : v) x = rng.gaussian();
        normalize_unit(v);
        for (int c = 0; c < dim; ++c) {
            m(0, c) = v[static_cast<size_t>(c)];
            m(1, c) = -v[static_cast<size_t>(c)];
        }
        return m;
    }

    if (count <= dim && min_separation <= kOrthoDist * (1.0 - 1e-12)) {
        // Gram-Schmidt on seeded Gaussian draws: orthonormal, distance sqrt(2).
        Mat m(count, dim);
        for (int r = 0; r < count; ++r) {
            for (int attempt = 0;; ++attempt) {
                std::vector<double> v(static_cast<size_t>(dim));
                for (double& x : v) x = rng.gaussian();
                for (int p = 0; p < r; ++p) {
                    double dot = 0.0;
                    for (int c = 0; c < dim; ++c) dot += v[static_cast<size_t>(c)] * m(p, c);
                    for (int c = 0; c < dim; ++c) v[static_cast<size_t>(c)] -= dot * m(p, c);
                }
                double n = 0.0;
                for (double x : v) n += x * x;
                if (n > 1e-12) {
                    n = std::sqrt(n);
                    for (int c = 0; c < dim; ++c) m(r, c) = v[static_cast<size_t>(c)] / n;
                    break;
                }
                if (attempt > 64) throw numerical_error("prototypes: degenerate draws");
            }
        }
        return m;
    }

    // More classes than dimensions (or a separation beyond sqrt(2)):
    // rejection-sample whole sets of unit vectors.
    for (int attempt = 0; attempt < 200; ++attempt) {
        Mat m(count, dim);
        for (int r = 0; r < count; ++r) {
            std::vector<double> v(static_cast<size_t>(dim));
            for (double& x : v) x = rng.gaussian();
            normalize_unit(v);
            for (int c = 0; c < dim; ++c) m(r, c) = v[static_cast<size_t>(c)];
        }
        double worst = std::numeric_limits<double>::max();
        for (int a = 0; a < count; ++a)
            for (int b = a + 1; b < count; ++b) worst = std::min(worst, pair_distance(m, a, b));
        if (worst >= min_separation) return m;
    }
    throw config_error("prototypes: separation " + std::to_string(min_separation) +
                       " infeasible for " + std::to_string(count) + " classes in dim " +
                       std::to_string(dim));
}

Dataset generate(const GenConfig& cfg) {
    cfg.validate();
    const int ts = cfg.label_space.num_activities;
    const int ta = cfg.label_space.num_actions;

    const Mat scene_protos =
        class_prototypes(ts, cfg.scene_dim, cfg.prototype_separation, mix_seed(cfg.rng_seed, 0xA11CE));
    const Mat action_protos =
        class_prototypes(ta, cfg.person_dim, cfg.prototype_separation, mix_seed(cfg.rng_seed, 0xB0B));

    Dataset ds(cfg.label_space);

    const int test_count =
        std::min(cfg.num_graphs - 1,
                 static_cast<int>(std::lround(cfg.test_fraction * cfg.num_graphs)));
    const int train_count = cfg.num_graphs - test_count;

    char idbuf[32];
    std::vector<double> row(static_cast<size_t>(ta));
    for (int gi = 0; gi < cfg.num_graphs; ++gi) {
        Rng rng(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(gi)));
        std::snprintf(idbuf, sizeof idbuf, "g%05d", gi);
        const std::string id = idbuf;

        const int scene = rng.categorical(cfg.scene_prior);
        const int n = rng.uniform_int(cfg.persons_min, cfg.persons_max);
        for (int c = 0; c < ta; ++c) row[static_cast<size_t>(c)] = cfg.action_given_scene(scene, c);

        GroundTruth truth;
        truth.graph_id = id;
        truth.scene_label = scene;

        std::vector<double> scene_feat(static_cast<size_t>(cfg.scene_dim));
        for (int c = 0; c < cfg.scene_dim; ++c)
            scene_feat[static_cast<size_t>(c)] = scene_protos(scene, c) + cfg.noise_sigma * rng.gaussian();

        std::vector<std::vector<double>> person_feats;
        person_feats.reserve(static_cast<size_t>(n));
        for (int p = 0; p < n; ++p) {
            const int action = rng.categorical(row);
            truth.action_labels.push_back(action);
            std::vector<double> f(static_cast<size_t>(cfg.person_dim));
            for (int c = 0; c < cfg.person_dim; ++c)
                f[static_cast<size_t>(c)] = action_protos(action, c) + cfg.noise_sigma * rng.gaussian();
            person_feats.push_back(std::move(f));
        }

        SceneGraph graph(id, std::move(scene_feat), std::move(person_feats));
        if (gi < train_count) {
            ds.pool.add_graph(id, graph.num_nodes());
            ds.train_graphs.push_back(std::move(graph));
        } else {
            ds.test_graphs.push_back(std::move(graph));
        }
        ds.truths.emplace(id, std::move(truth));
    }

    // Initial labels: fully label training graphs in a seeded random order
    // until the node budget round(fraction * train nodes) is met.
    size_t train_nodes = 0;
    for (const auto& g : ds.train_graphs) train_nodes += static_cast<size_t>(g.num_nodes());
    const size_t target = static_cast<size_t>(
        std::lround(cfg.initial_labeled_fraction * static_cast<double>(train_nodes)));

    std::vector<int> perm(ds.train_graphs.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng pool_rng(mix_seed(cfg.rng_seed, 0xC0FFEE));
    for (int i = static_cast<int>(perm.size()) - 1; i > 0; --i)
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(pool_rng.uniform_int(0, i))]);

    size_t labeled = 0;
    for (int pi : perm) {
        if (labeled >= target) break;
        const SceneGraph& g = ds.train_graphs[static_cast<size_t>(pi)];
        const GroundTruth& t = ds.truths.at(g.id());
        std::vector<std::pair<NodeRef, int>> answers;
        for (int node = 0; node < g.num_nodes(); ++node)
            answers.push_back({NodeRef{g.id(), node}, t.label_of(node)});
        commit_labels(ds.pool, answers);
        labeled += answers.size();
    }
    return ds;
}

namespace {

Mat volleyball_action_table(int ts, int ta) {
    // Action 0 is the dominant "easy" class at mass 0.70; action 1 is the
    // rare class at 0.01. The rest of the mass rides on one scene-preferred
    // action, so knowing the scene label strongly constrains every person.
    Mat m(ts, ta);
    const double dominant = 0.70, rare = 0.01;
    for (int s = 0; s < ts; ++s) {
        const int pref = 2 + (s % (ta - 2));
        for (int a = 0; a < ta; ++a) {
            if (a == 0)
                m(s, a) = dominant;
            else if (a == 1)
                m(s, a) = rare;
            else if (a == pref)
                m(s, a) = 1.0 - dominant - rare;
            else
                m(s, a) = 0.0;
        }
    }
    return m;
}

Mat collective_action_table(int ts, int ta) {
    // Scene s pushes action s; the last action column is the spectator class.
    Mat m(ts, ta);
    for (int s = 0; s < ts; ++s) {
        for (int a = 0; a < ta; ++a) {
            if (a == s)
                m(s, a) = 0.60;
            else if (a == ta - 1)
                m(s, a) = 0.10;
            else
                m(s, a) = 0.30 / (ta - 2);
        }
    }
    return m;
}

}  // namespace

GenConfig volleyball_like_preset() {
    GenConfig cfg;
    cfg.label_space.num_activities = 8;
    cfg.label_space.num_actions = 9;
    cfg.num_graphs = 500;
    cfg.persons_min = 6;
    cfg.persons_max = 12;
    cfg.scene_dim = 12;
    cfg.person_dim = 12;
    cfg.noise_sigma = 0.6;
    cfg.scene_prior.assign(8, 1.0 / 8.0);
    cfg.action_given_scene = volleyball_action_table(8, 9);
    cfg.prototype_separation = 1.0;
    cfg.initial_labeled_fraction = 0.05;
    cfg.test_fraction = 0.2;
    return cfg;
}

GenConfig collective_like_preset() {
    GenConfig cfg;
    cfg.label_space.num_activities = 5;
    cfg.label_space.num_actions = 6;
    cfg.num_graphs = 500;
    cfg.persons_min = 2;
    cfg.persons_max = 8;
    cfg.scene_dim = 10;
    cfg.person_dim = 10;
    cfg.noise_sigma = 0.6;
    cfg.scene_prior.assign(5, 1.0 / 5.0);
    cfg.action_given_scene = collective_action_table(5, 6);
    cfg.prototype_separation = 1.0;
    cfg.initial_labeled_fraction = 0.05;
    cfg.test_fraction = 0.2;
    return cfg;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"volleyball-like", "collective-like"};
    return names;
}

GenConfig preset_by_name(const std::string& name) {
    if (name == "volleyball-like") return volleyball_like_preset();
    if (name == "collective-like") return collective_like_preset();
    throw config_error("unknown preset: " + name + " (expected volleyball-like or collective-like)");
}

}  // namespace eeral
