// Times the OpenMP sweeps against their single-threaded reference
// implementations on a generated dataset and reports speedups. The clamped
// inference sweep behind score_eer is the hot loop of the whole pipeline.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "eeral/model.hpp"
#include "eeral/selection.hpp"
#include "eeral/synthgen.hpp"
#include "eeral/threading.hpp"

using clock_type = std::chrono::steady_clock;

namespace {

double time_call(const std::function<void()>& fn) {
    const auto t0 = clock_type::now();
    fn();
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    eeral::apply_thread_env();

    int graphs = 24;
    int reps = 3;
    if (argc > 1) graphs = std::atoi(argv[1]);
    if (argc > 2) reps = std::atoi(argv[2]);

    eeral::GenConfig gcfg = eeral::volleyball_like_preset();
    gcfg.num_graphs = graphs;
    gcfg.test_fraction = 0.0;
    gcfg.initial_labeled_fraction = 0.2;
    gcfg.rng_seed = 7;
    const eeral::Dataset ds = eeral::generate(gcfg);

    const eeral::ModelParams params = eeral::ModelParams::random_init(
        ds.label_space, gcfg.scene_dim, gcfg.person_dim, 0.1, 11);
    const eeral::PotentialsFn pots = [&](const eeral::SceneGraph& g) {
        return eeral::unary_logits(params, g);
    };

    eeral::InferenceConfig icfg;
    icfg.rounds = 5;

    std::printf("bench: %zu train graphs, %zu unlabeled nodes, %d workers, %d reps\n",
                ds.train_graphs.size(), ds.pool.unlabeled_count(), eeral::worker_count(), reps);
    std::printf("%-18s %12s %12s %9s\n", "kernel", "serial[s]", "parallel[s]", "speedup");

    auto report = [&](const char* name, const std::function<void()>& serial,
                      const std::function<void()>& parallel) {
        double ts = 0.0, tp = 0.0;
        for (int r = 0; r < reps; ++r) {
            ts += time_call(serial);
            tp += time_call(parallel);
        }
        ts /= reps;
        tp /= reps;
        std::printf("%-18s %12.4f %12.4f %8.2fx\n", name, ts, tp, ts / tp);
    };

    report(
        "score_eer",
        [&] { (void)eeral::serial::score_eer(ds.train_graphs, pots, ds.pool, icfg); },
        [&] { (void)eeral::score_eer(ds.train_graphs, pots, ds.pool, icfg); });

    report(
        "score_ec",
        [&] { (void)eeral::serial::score_expected_change(ds.train_graphs, pots, ds.pool, icfg); },
        [&] { (void)eeral::score_expected_change(ds.train_graphs, pots, ds.pool, icfg); });

    std::vector<const eeral::SceneGraph*> gptrs;
    for (const auto& g : ds.train_graphs) gptrs.push_back(&g);
    report(
        "loss_gradient",
        [&] { (void)eeral::serial::loss_gradient(params, gptrs, ds.pool, icfg); },
        [&] { (void)eeral::loss_gradient(params, gptrs, ds.pool, icfg); });

    return 0;
}
