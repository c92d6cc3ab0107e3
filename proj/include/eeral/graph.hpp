#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eeral/common.hpp"

namespace eeral {

// Label alphabets. Scene (group activity) nodes and person (action) nodes
// carry different alphabets.
struct LabelSpace {
    int num_activities = 0;  // scene alphabet size
    int num_actions = 0;     // person alphabet size
    std::vector<std::string> activity_names;  // optional; empty or num_activities entries
    std::vector<std::string> action_names;    // optional; empty or num_actions entries

    void validate() const;
};

// Address of one node in one graph. node_index 0 is always the scene node,
// 1..N are person nodes.
struct NodeRef {
    std::string graph_id;
    int node_index = 0;

    bool is_scene() const { return node_index == 0; }
    auto operator<=>(const NodeRef&) const = default;
};

// One frame: a scene node connected to every person node, persons fully
// interconnected. Edges are implicit in N and never stored.
class SceneGraph {
  public:
    struct Edge {
        int a = 0, b = 0;  // node indices, a < b
    };

    SceneGraph(std::string graph_id, std::vector<double> scene_feature,
               std::vector<std::vector<double>> person_features);

    const std::string& id() const { return id_; }
    int num_persons() const { return static_cast<int>(person_features_.size()); }
    int num_nodes() const { return num_persons() + 1; }
    int num_edges() const {
        int n = num_persons();
        return n + n * (n - 1) / 2;
    }
    int scene_dim() const { return static_cast<int>(scene_feature_.size()); }
    int person_dim() const { return static_cast<int>(person_features_[0].size()); }

    const std::vector<double>& scene_feature() const { return scene_feature_; }
    const std::vector<double>& person_feature(int person) const {
        return person_features_.at(static_cast<size_t>(person));
    }

    // Deterministic order: scene-person edges by person index, then
    // person-person pairs lexicographically.
    std::vector<Edge> edges() const;

  private:
    std::string id_;
    std::vector<double> scene_feature_;
    std::vector<std::vector<double>> person_features_;
};

// True labels of one graph. Readable only by the oracle and the evaluator;
// the model and the selectors never see it.
struct GroundTruth {
    std::string graph_id;
    int scene_label = 0;
    std::vector<int> action_labels;

    int label_of(int node_index) const {
        return node_index == 0 ? scene_label : action_labels.at(static_cast<size_t>(node_index - 1));
    }
};

// Partition of all registered nodes into labeled set L and unlabeled set U.
// Labels are write-once; committing to an already labeled node is an error.
class AnnotationPool {
  public:
    explicit AnnotationPool(LabelSpace space) : space_(std::move(space)) { space_.validate(); }

    const LabelSpace& label_space() const { return space_; }

    void add_graph(const std::string& graph_id, int num_nodes);

    bool has_graph(const std::string& graph_id) const { return states_.count(graph_id) > 0; }
    int num_nodes(const std::string& graph_id) const;

    bool is_labeled(const NodeRef& ref) const;
    int label_of(const NodeRef& ref) const;  // throws if unlabeled

    std::vector<NodeRef> labeled() const;
    std::vector<NodeRef> unlabeled() const;

    size_t labeled_count() const { return labeled_count_; }
    size_t unlabeled_count() const { return total_count_ - labeled_count_; }
    size_t total_count() const { return total_count_; }

    // Per-graph views used by selection-time clamping.
    std::map<int, int> labeled_in_graph(const std::string& graph_id) const;
    std::vector<int> unlabeled_in_graph(const std::string& graph_id) const;

    friend void commit_labels(AnnotationPool& pool,
                              const std::vector<std::pair<NodeRef, int>>& answers);

  private:
    int state_of(const NodeRef& ref) const;  // -1 unlabeled, else label

    LabelSpace space_;
    std::map<std::string, std::vector<int>> states_;  // -1 = unlabeled
    size_t labeled_count_ = 0;
    size_t total_count_ = 0;
};

// Applies oracle answers to the pool. Validates every answer before touching
// anything, so a failed commit leaves the pool unchanged.
void commit_labels(AnnotationPool& pool, const std::vector<std::pair<NodeRef, int>>& answers);

}  // namespace eeral
