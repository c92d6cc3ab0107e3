#include "eeral/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace eeral {

namespace {

int argmax_lowest_tie(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
    return best;
}

}  // namespace

std::pair<double, double> accuracy(std::span<const Marginals> marginals,
                                   std::span<const GroundTruth> truths) {
    if (marginals.size() != truths.size())
        throw std::invalid_argument("accuracy: marginal/truth count mismatch");
    if (marginals.empty()) throw std::invalid_argument("accuracy: empty test set");
    size_t scene_hits = 0, action_hits = 0, action_trials = 0;
    for (size_t i = 0; i < marginals.size(); ++i) {
        const auto& m = marginals[i];
        const auto& t = truths[i];
        if (m.num_nodes() != static_cast<int>(t.action_labels.size()) + 1)
            throw std::invalid_argument("accuracy: node count mismatch in graph " + t.graph_id);
        if (argmax_lowest_tie(m.dist[0]) == t.scene_label) ++scene_hits;
        for (size_t p = 0; p < t.action_labels.size(); ++p) {
            if (argmax_lowest_tie(m.dist[p + 1]) == t.action_labels[p]) ++action_hits;
            ++action_trials;
        }
    }
    return {static_cast<double>(scene_hits) / static_cast<double>(marginals.size()),
            static_cast<double>(action_hits) / static_cast<double>(action_trials)};
}

std::vector<SelectionComposition> selection_composition(
    std::span<const Selection> selections, const std::map<std::string, GroundTruth>& truths,
    const LabelSpace& space) {
    std::vector<SelectionComposition> out;
    out.reserve(selections.size());
    for (const auto& sel : selections) {
        SelectionComposition c;
        c.iteration = sel.iteration;
        c.scene_class_counts.assign(static_cast<size_t>(space.num_activities), 0);
        c.action_class_counts.assign(static_cast<size_t>(space.num_actions), 0);
        for (const auto& e : sel.chosen) {
            const GroundTruth& t = truths.at(e.node.graph_id);
            const int truth = t.label_of(e.node.node_index);
            if (e.node.is_scene()) {
                ++c.scene_count;
                ++c.scene_class_counts[static_cast<size_t>(truth)];
            } else {
                ++c.action_count;
                ++c.action_class_counts[static_cast<size_t>(truth)];
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<AggregateRow> aggregate_curves(std::span<const CurvePoint> points) {
    std::map<std::pair<std::string, int>, std::vector<const CurvePoint*>> cells;
    for (const auto& p : points) cells[{p.strategy, p.iteration}].push_back(&p);

    auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        if (xs.size() < 2) return std::pair<double, double>{mean, 0.0};
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size() - 1);
        return std::pair<double, double>{mean, std::sqrt(var)};
    };

    std::vector<AggregateRow> rows;
    for (const auto& [key, cell] : cells) {
        std::vector<double> scene, action, ann;
        for (const auto* p : cell) {
            scene.push_back(p->scene_acc);
            action.push_back(p->action_acc);
            ann.push_back(static_cast<double>(p->annotations));
        }
        AggregateRow r;
        r.strategy = key.first;
        r.iteration = key.second;
        std::tie(r.scene_mean, r.scene_std) = mean_std(scene);
        std::tie(r.action_mean, r.action_std) = mean_std(action);
        r.annotations = mean_std(ann).first;
        r.runs = static_cast<int>(cell.size());
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_curve_header(std::ostream& os) {
    os << "strategy,seed,iteration,annotations,scene_acc,action_acc\n";
}

void write_curve_rows(std::ostream& os, std::span<const CurvePoint> points) {
    char a[40], b[40];
    for (const auto& p : points) {
        std::snprintf(a, sizeof a, "%.6f", p.scene_acc);
        std::snprintf(b, sizeof b, "%.6f", p.action_acc);
        os << p.strategy << ',' << p.seed << ',' << p.iteration << ',' << p.annotations << ','
           << a << ',' << b << '\n';
    }
}

std::vector<CurvePoint> read_curve_csv(std::istream& is) {
    std::vector<CurvePoint> out;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("strategy,", 0) == 0) continue;  // header
        }
        CurvePoint p;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        if (!(ss >> p.strategy >> p.seed >> p.iteration >> p.annotations >> p.scene_acc >>
              p.action_acc))
            throw config_error("curve csv: bad row: " + line);
        out.push_back(std::move(p));
    }
    return out;
}

void write_composition_header(std::ostream& os) {
    os << "strategy,seed,iteration,node_type,class,count\n";
}

void write_composition_rows(std::ostream& os, const std::string& strategy, std::uint64_t seed,
                            std::span<const SelectionComposition> comps) {
    for (const auto& c : comps) {
        for (size_t cls = 0; cls < c.scene_class_counts.size(); ++cls)
            os << strategy << ',' << seed << ',' << c.iteration << ",scene," << cls << ','
               << c.scene_class_counts[cls] << '\n';
        for (size_t cls = 0; cls < c.action_class_counts.size(); ++cls)
            os << strategy << ',' << seed << ',' << c.iteration << ",action," << cls << ','
               << c.action_class_counts[cls] << '\n';
    }
}

void write_aggregate_csv(std::ostream& os, std::span<const AggregateRow> rows) {
    os << "strategy,iteration,annotations,scene_mean,scene_std,action_mean,action_std,runs\n";
    char bufs[5][40];
    for (const auto& r : rows) {
        std::snprintf(bufs[0], 40, "%.1f", r.annotations);
        std::snprintf(bufs[1], 40, "%.6f", r.scene_mean);
        std::snprintf(bufs[2], 40, "%.6f", r.scene_std);
        std::snprintf(bufs[3], 40, "%.6f", r.action_mean);
        std::snprintf(bufs[4], 40, "%.6f", r.action_std);
        os << r.strategy << ',' << r.iteration << ',' << bufs[0] << ',' << bufs[1] << ','
           << bufs[2] << ',' << bufs[3] << ',' << bufs[4] << ',' << r.runs << '\n';
    }
}

}  // namespace eeral
