#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eeral/graph.hpp"

namespace eeral {

// A generated or loaded experiment dataset. The annotation pool covers the
// training graphs only; test graphs stay unlabeled and are never selectable.
struct Dataset {
    LabelSpace label_space;
    std::vector<SceneGraph> train_graphs;
    std::vector<SceneGraph> test_graphs;
    std::map<std::string, GroundTruth> truths;  // keyed by graph id, train and test
    AnnotationPool pool;                        // train nodes

    explicit Dataset(LabelSpace space) : label_space(space), pool(std::move(space)) {}

    size_t train_node_count() const;
};

// Text format, one record per graph:
//   graph <id> <N> <d_s> <d_a>
//   <d_s scene feature floats>
//   N lines of <d_a person feature floats>
//   truth <scene_label> <a_1> ... <a_N>
//   labels <mask>          mask has N+1 chars: '.' unlabeled, else label char
// Floats are written with 17 significant digits and round-trip exactly.

char label_to_char(int label);
int label_from_char(char c);

void save_graph_records(std::ostream& os, std::span<const SceneGraph> graphs,
                        const std::map<std::string, GroundTruth>& truths,
                        const AnnotationPool* pool);

void load_graph_records(std::istream& is, const LabelSpace& space,
                        std::vector<SceneGraph>& graphs,
                        std::map<std::string, GroundTruth>& truths, AnnotationPool* pool);

// Writes <dir>/train.txt and <dir>/test.txt.
void save_dataset(const std::string& dir, const Dataset& ds);

// Loads the pair written by save_dataset. The text format does not carry the
// label alphabets, so the caller supplies them.
Dataset load_dataset(const std::string& dir, const LabelSpace& space);

}  // namespace eeral
