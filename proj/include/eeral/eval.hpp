#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eeral/graph.hpp"
#include "eeral/inference.hpp"
#include "eeral/selection.hpp"

namespace eeral {

// Argmax-vs-truth accuracy over an order-matched set of test graphs,
// separately for scene nodes and person nodes. Argmax ties go to the lowest
// label index.
std::pair<double, double> accuracy(std::span<const Marginals> marginals,
                                   std::span<const GroundTruth> truths);

struct SelectionComposition {
    int iteration = 0;
    size_t scene_count = 0;
    size_t action_count = 0;
    std::vector<size_t> scene_class_counts;   // by true class of the selected node
    std::vector<size_t> action_class_counts;
};

std::vector<SelectionComposition> selection_composition(
    std::span<const Selection> selections, const std::map<std::string, GroundTruth>& truths,
    const LabelSpace& space);

struct CurvePoint {
    std::string strategy;
    std::uint64_t seed = 0;
    int iteration = 0;
    size_t annotations = 0;  // labels added since the initial pool
    double scene_acc = 0.0;
    double action_acc = 0.0;
};

struct AggregateRow {
    std::string strategy;
    int iteration = 0;
    double annotations = 0.0;
    double scene_mean = 0.0, scene_std = 0.0;
    double action_mean = 0.0, action_std = 0.0;
    int runs = 0;
};

// Sample mean and (n-1)-normalized stddev per (strategy, iteration);
// a single run reports stddev 0.
std::vector<AggregateRow> aggregate_curves(std::span<const CurvePoint> points);

// curve CSV: strategy,seed,iteration,annotations,scene_acc,action_acc
void write_curve_header(std::ostream& os);
void write_curve_rows(std::ostream& os, std::span<const CurvePoint> points);
std::vector<CurvePoint> read_curve_csv(std::istream& is);

// composition CSV: strategy,seed,iteration,node_type,class,count
void write_composition_header(std::ostream& os);
void write_composition_rows(std::ostream& os, const std::string& strategy, std::uint64_t seed,
                            std::span<const SelectionComposition> comps);

// aggregate CSV: strategy,iteration,annotations,scene_mean,scene_std,action_mean,action_std,runs
void write_aggregate_csv(std::ostream& os, std::span<const AggregateRow> rows);

}  // namespace eeral
