#include "eeral/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace eeral {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::EER: return "eer";
        case Strategy::SA: return "sa";
        case Strategy::LC: return "lc";
        case Strategy::Margin: return "m";
        case Strategy::EC: return "ec";
        case Strategy::Random: return "rnd";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    if (name == "eer") return Strategy::EER;
    if (name == "sa") return Strategy::SA;
    if (name == "lc") return Strategy::LC;
    if (name == "m" || name == "margin") return Strategy::Margin;
    if (name == "ec") return Strategy::EC;
    if (name == "rnd" || name == "random") return Strategy::Random;
    return std::nullopt;
}

double clamped_average_entropy(const SceneGraph& g, const PotentialTables& pots,
                               const ClampSet& base_clamps, int node, int label,
                               const InferenceConfig& cfg) {
    if (base_clamps.count(node))
        throw std::invalid_argument("clamped_average_entropy: node already clamped");
    ClampSet clamps = base_clamps;
    clamps[node] = label;
    return average_entropy(infer(g, pots, clamps, cfg));
}

double expected_entropy_reduction(const SceneGraph& g, const PotentialTables& pots,
                                  const ClampSet& base_clamps, int node,
                                  const InferenceConfig& cfg) {
    if (base_clamps.count(node))
        throw std::invalid_argument("expected_entropy_reduction: node already clamped");
    const Marginals base = infer(g, pots, base_clamps, cfg);
    const double h_bar = average_entropy(base);
    const auto& belief = base.dist[static_cast<size_t>(node)];
    double expected = 0.0;
    for (size_t j = 0; j < belief.size(); ++j) {
        const double w = belief[j];
        if (w == 0.0) continue;
        expected += w * clamped_average_entropy(g, pots, base_clamps, node,
                                                static_cast<int>(j), cfg);
    }
    return h_bar - expected;
}

namespace {

struct GraphWork {
    const SceneGraph* graph = nullptr;
    ClampSet base_clamps;
    std::vector<int> unlabeled;
};

std::vector<GraphWork> collect_work(std::span<const SceneGraph> graphs,
                                    const AnnotationPool& pool) {
    if (pool.unlabeled_count() == 0)
        throw std::invalid_argument("selection: unlabeled pool is empty");
    std::vector<GraphWork> work;
    work.reserve(graphs.size());
    for (const auto& g : graphs) {
        GraphWork w;
        w.graph = &g;
        for (const auto& [node, label] : pool.labeled_in_graph(g.id())) w.base_clamps[node] = label;
        w.unlabeled = pool.unlabeled_in_graph(g.id());
        work.push_back(std::move(w));
    }
    return work;
}

void check_finite(const SelectionScore& s) {
    for (const auto& e : s.entries)
        if (!std::isfinite(e.score))
            throw numerical_error("selection: non-finite score at " + e.node.graph_id + "/" +
                                  std::to_string(e.node.node_index));
}

// Base marginals for every graph, parallel over graphs.
std::vector<Marginals> base_marginals(const std::vector<GraphWork>& work,
                                      const PotentialsFn& potentials,
                                      const InferenceConfig& cfg) {
    std::vector<Marginals> base(work.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(work.size()); ++i) {
        const auto& w = work[static_cast<size_t>(i)];
        base[static_cast<size_t>(i)] = infer(*w.graph, potentials(*w.graph), w.base_clamps, cfg);
    }
    return base;
}

// Sweeps that score each unlabeled node from the graph's base marginals only.
template <typename NodeScore>
SelectionScore marginal_sweep(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                              const AnnotationPool& pool, const InferenceConfig& cfg,
                              Strategy tag, NodeScore&& node_score) {
    const auto work = collect_work(graphs, pool);
    const auto base = base_marginals(work, potentials, cfg);
    SelectionScore out;
    out.strategy = tag;
    for (size_t i = 0; i < work.size(); ++i)
        for (int node : work[i].unlabeled)
            out.entries.push_back({NodeRef{work[i].graph->id(), node},
                                   node_score(base[i].dist[static_cast<size_t>(node)])});
    check_finite(out);
    return out;
}

struct Cell {
    int work_index = 0;
    int node = 0;
};

std::vector<Cell> flatten_cells(const std::vector<GraphWork>& work) {
    std::vector<Cell> cells;
    for (size_t i = 0; i < work.size(); ++i)
        for (int node : work[i].unlabeled) cells.push_back({static_cast<int>(i), node});
    return cells;
}

SelectionScore eer_impl(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                        const AnnotationPool& pool, const InferenceConfig& cfg, bool parallel) {
    const auto work = collect_work(graphs, pool);
    SelectionScore out;
    out.strategy = Strategy::EER;

    if (!parallel) {
        // Reference path: one independent per-node computation, exactly the
        // naive dataset loop.
        for (const auto& w : work) {
            const PotentialTables pots = potentials(*w.graph);
            for (int node : w.unlabeled)
                out.entries.push_back(
                    {NodeRef{w.graph->id(), node},
                     expected_entropy_reduction(*w.graph, pots, w.base_clamps, node, cfg)});
        }
        check_finite(out);
        return out;
    }

    // Parallel path: base inference per graph once, then a flat
    // (graph x node) sweep; reduction order is fixed by the cell list.
    std::vector<PotentialTables> pots(work.size());
    std::vector<Marginals> base(work.size());
    std::vector<double> h_bar(work.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(work.size()); ++i) {
        const auto& w = work[static_cast<size_t>(i)];
        pots[static_cast<size_t>(i)] = potentials(*w.graph);
        base[static_cast<size_t>(i)] =
            infer(*w.graph, pots[static_cast<size_t>(i)], w.base_clamps, cfg);
        h_bar[static_cast<size_t>(i)] = average_entropy(base[static_cast<size_t>(i)]);
    }

    const auto cells = flatten_cells(work);
    std::vector<double> phi(cells.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < static_cast<long>(cells.size()); ++c) {
        const auto& cell = cells[static_cast<size_t>(c)];
        const auto& w = work[static_cast<size_t>(cell.work_index)];
        const auto& belief =
            base[static_cast<size_t>(cell.work_index)].dist[static_cast<size_t>(cell.node)];
        double expected = 0.0;
        for (size_t j = 0; j < belief.size(); ++j) {
            const double weight = belief[j];
            if (weight == 0.0) continue;
            expected += weight * clamped_average_entropy(*w.graph,
                                                         pots[static_cast<size_t>(cell.work_index)],
                                                         w.base_clamps, cell.node,
                                                         static_cast<int>(j), cfg);
        }
        phi[static_cast<size_t>(c)] = h_bar[static_cast<size_t>(cell.work_index)] - expected;
    }

    out.entries.reserve(cells.size());
    for (size_t c = 0; c < cells.size(); ++c)
        out.entries.push_back(
            {NodeRef{work[static_cast<size_t>(cells[c].work_index)].graph->id(), cells[c].node},
             phi[c]});
    check_finite(out);
    return out;
}

int argmax_lowest_tie(std::span<const double> v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
    return best;
}

SelectionScore ec_impl(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                       const AnnotationPool& pool, const InferenceConfig& cfg, bool parallel) {
    const auto work = collect_work(graphs, pool);
    std::vector<PotentialTables> pots(work.size());
    std::vector<Marginals> base(work.size());

    auto prepare = [&](long i) {
        const auto& w = work[static_cast<size_t>(i)];
        pots[static_cast<size_t>(i)] = potentials(*w.graph);
        base[static_cast<size_t>(i)] =
            infer(*w.graph, pots[static_cast<size_t>(i)], w.base_clamps, cfg);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(work.size()); ++i) prepare(i);
    } else {
        for (long i = 0; i < static_cast<long>(work.size()); ++i) prepare(i);
    }

    const auto cells = flatten_cells(work);
    std::vector<double> score(cells.size(), 0.0);

    auto eval_cell = [&](long c) {
        const auto& cell = cells[static_cast<size_t>(c)];
        const auto& w = work[static_cast<size_t>(cell.work_index)];
        const Marginals& b = base[static_cast<size_t>(cell.work_index)];
        const auto& belief = b.dist[static_cast<size_t>(cell.node)];
        double acc = 0.0;
        for (size_t j = 0; j < belief.size(); ++j) {
            const double weight = belief[j];
            if (weight == 0.0) continue;
            ClampSet clamps = w.base_clamps;
            clamps[cell.node] = static_cast<int>(j);
            const Marginals after =
                infer(*w.graph, pots[static_cast<size_t>(cell.work_index)], clamps, cfg);
            int changed = 0;
            for (int n = 0; n < after.num_nodes(); ++n) {
                if (n == cell.node) continue;
                if (argmax_lowest_tie(after.dist[static_cast<size_t>(n)]) !=
                    argmax_lowest_tie(b.dist[static_cast<size_t>(n)]))
                    ++changed;
            }
            acc += weight * changed;
        }
        score[static_cast<size_t>(c)] = acc;
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long c = 0; c < static_cast<long>(cells.size()); ++c) eval_cell(c);
    } else {
        for (long c = 0; c < static_cast<long>(cells.size()); ++c) eval_cell(c);
    }

    SelectionScore out;
    out.strategy = Strategy::EC;
    out.entries.reserve(cells.size());
    for (size_t c = 0; c < cells.size(); ++c)
        out.entries.push_back(
            {NodeRef{work[static_cast<size_t>(cells[c].work_index)].graph->id(), cells[c].node},
             score[c]});
    check_finite(out);
    return out;
}

}  // namespace

SelectionScore score_eer(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                         const AnnotationPool& pool, const InferenceConfig& cfg) {
    return eer_impl(graphs, potentials, pool, cfg, /*parallel=*/true);
}

SelectionScore score_entropy(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                             const AnnotationPool& pool, const InferenceConfig& cfg) {
    return marginal_sweep(graphs, potentials, pool, cfg, Strategy::SA,
                          [](const std::vector<double>& d) { return node_entropy(d); });
}

SelectionScore score_least_confidence(std::span<const SceneGraph> graphs,
                                      const PotentialsFn& potentials, const AnnotationPool& pool,
                                      const InferenceConfig& cfg) {
    return marginal_sweep(graphs, potentials, pool, cfg, Strategy::LC,
                          [](const std::vector<double>& d) {
                              return 1.0 - *std::max_element(d.begin(), d.end());
                          });
}

SelectionScore score_margin(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                            const AnnotationPool& pool, const InferenceConfig& cfg) {
    return marginal_sweep(graphs, potentials, pool, cfg, Strategy::Margin,
                          [](const std::vector<double>& d) {
                              double top1 = -1.0, top2 = -1.0;
                              for (double p : d) {
                                  if (p > top1) {
                                      top2 = top1;
                                      top1 = p;
                                  } else if (p > top2) {
                                      top2 = p;
                                  }
                              }
                              return -(top1 - top2);
                          });
}

SelectionScore score_expected_change(std::span<const SceneGraph> graphs,
                                     const PotentialsFn& potentials, const AnnotationPool& pool,
                                     const InferenceConfig& cfg) {
    return ec_impl(graphs, potentials, pool, cfg, /*parallel=*/true);
}

SelectionScore score_random(const AnnotationPool& pool, std::uint64_t seed) {
    if (pool.unlabeled_count() == 0)
        throw std::invalid_argument("selection: unlabeled pool is empty");
    SelectionScore out;
    out.strategy = Strategy::Random;
    Rng rng(seed);
    for (const auto& ref : pool.unlabeled()) out.entries.push_back({ref, rng.uniform()});
    return out;
}

namespace serial {
SelectionScore score_eer(std::span<const SceneGraph> graphs, const PotentialsFn& potentials,
                         const AnnotationPool& pool, const InferenceConfig& cfg) {
    return eer_impl(graphs, potentials, pool, cfg, /*parallel=*/false);
}
SelectionScore score_expected_change(std::span<const SceneGraph> graphs,
                                     const PotentialsFn& potentials, const AnnotationPool& pool,
                                     const InferenceConfig& cfg) {
    return ec_impl(graphs, potentials, pool, cfg, /*parallel=*/false);
}
}  // namespace serial

SelectionScore compute_scores(Strategy strategy, std::span<const SceneGraph> graphs,
                              const PotentialsFn& potentials, const AnnotationPool& pool,
                              const InferenceConfig& cfg, std::uint64_t random_seed) {
    switch (strategy) {
        case Strategy::EER: return score_eer(graphs, potentials, pool, cfg);
        case Strategy::SA: return score_entropy(graphs, potentials, pool, cfg);
        case Strategy::LC: return score_least_confidence(graphs, potentials, pool, cfg);
        case Strategy::Margin: return score_margin(graphs, potentials, pool, cfg);
        case Strategy::EC: return score_expected_change(graphs, potentials, pool, cfg);
        case Strategy::Random: return score_random(pool, random_seed);
    }
    throw std::invalid_argument("unknown strategy");
}

Selection top_k(const SelectionScore& scores, int k, int iteration) {
    if (k < 1) throw std::invalid_argument("top_k: k must be >= 1");
    Selection sel;
    sel.iteration = iteration;
    sel.chosen = scores.entries;
    std::sort(sel.chosen.begin(), sel.chosen.end(), [](const ScoredNode& a, const ScoredNode& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.node < b.node;
    });
    if (static_cast<size_t>(k) < sel.chosen.size()) sel.chosen.resize(static_cast<size_t>(k));
    return sel;
}

void write_selection_header(std::ostream& os) {
    os << "iteration,graph_id,node_index,node_type,score,strategy\n";
}

void write_selection_rows(std::ostream& os, const Selection& sel, Strategy strategy) {
    char buf[40];
    for (const auto& e : sel.chosen) {
        std::snprintf(buf, sizeof buf, "%.12g", e.score);
        os << sel.iteration << ',' << e.node.graph_id << ',' << e.node.node_index << ','
           << (e.node.is_scene() ? "scene" : "action") << ',' << buf << ','
           << strategy_name(strategy) << '\n';
    }
}

}  // namespace eeral
