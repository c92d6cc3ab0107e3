#include "eeral/active_loop.hpp"

#include <chrono>
#include <stdexcept>

#include "eeral/eval.hpp"

namespace eeral {

std::vector<std::pair<NodeRef, int>> oracle_answer(
    const std::map<std::string, GroundTruth>& truths, std::span<const NodeRef> refs) {
    std::vector<std::pair<NodeRef, int>> answers;
    answers.reserve(refs.size());
    for (const auto& ref : refs) {
        auto it = truths.find(ref.graph_id);
        if (it == truths.end())
            throw std::out_of_range("oracle: unknown graph " + ref.graph_id);
        if (ref.node_index < 0 ||
            ref.node_index > static_cast<int>(it->second.action_labels.size()))
            throw std::out_of_range("oracle: node index out of range in " + ref.graph_id);
        answers.push_back({ref, it->second.label_of(ref.node_index)});
    }
    return answers;
}

void LoopConfig::validate() const {
    if (k_per_iteration < 1) throw config_error("loop: k_per_iteration must be >= 1");
    if (num_iterations < 0) throw config_error("loop: num_iterations must be >= 0");
    train.validate();
}

std::vector<Marginals> evaluate_marginals(const ModelParams& params,
                                          std::span<const SceneGraph> test_graphs,
                                          const InferenceConfig& cfg) {
    std::vector<Marginals> out(test_graphs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(test_graphs.size()); ++i) {
        const SceneGraph& g = test_graphs[static_cast<size_t>(i)];
        out[static_cast<size_t>(i)] = infer(g, unary_logits(params, g), {}, cfg);
    }
    return out;
}

std::vector<IterationRecord> run_active_learning(
    const Dataset& ds, const ModelParams& initial_params, const LoopConfig& cfg,
    const std::function<void(const IterationRecord&)>& on_record) {
    cfg.validate();
    if (ds.pool.labeled_count() == 0)
        throw std::invalid_argument("active loop: initial pool has no labeled nodes");
    if (ds.test_graphs.empty())
        throw std::invalid_argument("active loop: no test graphs to evaluate on");

    AnnotationPool pool = ds.pool;
    ModelParams params = initial_params;

    std::vector<GroundTruth> test_truths;
    test_truths.reserve(ds.test_graphs.size());
    for (const auto& g : ds.test_graphs) test_truths.push_back(ds.truths.at(g.id()));

    const PotentialsFn potentials = [&params](const SceneGraph& g) {
        return unary_logits(params, g);
    };

    std::vector<IterationRecord> records;
    for (int t = 0; t <= cfg.num_iterations; ++t) {
        const auto started = std::chrono::steady_clock::now();
        IterationRecord rec;
        rec.iteration = t;

        TrainConfig tcfg = cfg.train;
        tcfg.rng_seed = mix_seed(cfg.rng_seed, 0x7121);
        train_iteration(params, ds.train_graphs, pool, tcfg, cfg.infer, t);
        const auto [lr, wd] = schedule(t, tcfg);
        rec.lr = lr;
        rec.wd = wd;

        const auto test_marg = evaluate_marginals(params, ds.test_graphs, cfg.infer);
        std::tie(rec.scene_acc, rec.action_acc) = accuracy(test_marg, test_truths);

        rec.labeled_total = pool.labeled_count();
        for (const auto& ref : pool.labeled())
            (ref.is_scene() ? rec.labeled_scene : rec.labeled_action) += 1;

        if (t < cfg.num_iterations && pool.unlabeled_count() > 0) {
            rec.pool_unlabeled = pool.unlabeled_count();
            for (const auto& ref : pool.unlabeled())
                if (ref.is_scene()) ++rec.pool_unlabeled_scene;

            const auto scores = compute_scores(cfg.strategy, ds.train_graphs, potentials, pool,
                                               cfg.infer, mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(t)));
            rec.selection = top_k(scores, cfg.k_per_iteration, t);

            std::vector<NodeRef> refs;
            refs.reserve(rec.selection.chosen.size());
            for (const auto& e : rec.selection.chosen) refs.push_back(e.node);
            commit_labels(pool, oracle_answer(ds.truths, refs));
        }

        rec.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (on_record) on_record(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace eeral
