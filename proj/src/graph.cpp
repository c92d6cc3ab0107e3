#include "eeral/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace eeral {

void LabelSpace::validate() const {
    if (num_activities < 2 || num_actions < 2)
        throw std::invalid_argument("LabelSpace: both alphabets need at least 2 labels");
    if (!activity_names.empty() && static_cast<int>(activity_names.size()) != num_activities)
        throw std::invalid_argument("LabelSpace: activity name count mismatch");
    if (!action_names.empty() && static_cast<int>(action_names.size()) != num_actions)
        throw std::invalid_argument("LabelSpace: action name count mismatch");
}

SceneGraph::SceneGraph(std::string graph_id, std::vector<double> scene_feature,
                       std::vector<std::vector<double>> person_features)
    : id_(std::move(graph_id)),
      scene_feature_(std::move(scene_feature)),
      person_features_(std::move(person_features)) {
    if (person_features_.empty())
        throw std::invalid_argument("SceneGraph " + id_ + ": needs at least one person");
    if (scene_feature_.empty())
        throw std::invalid_argument("SceneGraph " + id_ + ": empty scene feature");
    const size_t d = person_features_[0].size();
    if (d == 0) throw std::invalid_argument("SceneGraph " + id_ + ": empty person feature");
    for (const auto& f : person_features_)
        if (f.size() != d)
            throw std::invalid_argument("SceneGraph " + id_ + ": inconsistent person feature dims");
}

std::vector<SceneGraph::Edge> SceneGraph::edges() const {
    std::vector<Edge> es;
    const int n = num_persons();
    es.reserve(static_cast<size_t>(num_edges()));
    for (int p = 1; p <= n; ++p) es.push_back({0, p});
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) es.push_back({i, j});
    return es;
}

void AnnotationPool::add_graph(const std::string& graph_id, int num_nodes) {
    if (num_nodes < 2) throw std::invalid_argument("AnnotationPool: graph needs scene + persons");
    auto [it, inserted] = states_.emplace(graph_id, std::vector<int>(num_nodes, -1));
    if (!inserted) throw std::invalid_argument("AnnotationPool: duplicate graph " + graph_id);
    total_count_ += static_cast<size_t>(num_nodes);
}

int AnnotationPool::num_nodes(const std::string& graph_id) const {
    auto it = states_.find(graph_id);
    if (it == states_.end())
        throw std::out_of_range("AnnotationPool: unknown graph " + graph_id);
    return static_cast<int>(it->second.size());
}

int AnnotationPool::state_of(const NodeRef& ref) const {
    auto it = states_.find(ref.graph_id);
    if (it == states_.end())
        throw std::out_of_range("AnnotationPool: unknown graph " + ref.graph_id);
    if (ref.node_index < 0 || ref.node_index >= static_cast<int>(it->second.size()))
        throw std::out_of_range("AnnotationPool: node index out of range in " + ref.graph_id);
    return it->second[static_cast<size_t>(ref.node_index)];
}

bool AnnotationPool::is_labeled(const NodeRef& ref) const { return state_of(ref) >= 0; }

int AnnotationPool::label_of(const NodeRef& ref) const {
    int s = state_of(ref);
    if (s < 0)
        throw std::logic_error("AnnotationPool: node is unlabeled: " + ref.graph_id + "/" +
                               std::to_string(ref.node_index));
    return s;
}

std::vector<NodeRef> AnnotationPool::labeled() const {
    std::vector<NodeRef> out;
    out.reserve(labeled_count_);
    for (const auto& [gid, st] : states_)
        for (size_t i = 0; i < st.size(); ++i)
            if (st[i] >= 0) out.push_back({gid, static_cast<int>(i)});
    return out;
}

std::vector<NodeRef> AnnotationPool::unlabeled() const {
    std::vector<NodeRef> out;
    out.reserve(unlabeled_count());
    for (const auto& [gid, st] : states_)
        for (size_t i = 0; i < st.size(); ++i)
            if (st[i] < 0) out.push_back({gid, static_cast<int>(i)});
    return out;
}

std::map<int, int> AnnotationPool::labeled_in_graph(const std::string& graph_id) const {
    auto it = states_.find(graph_id);
    if (it == states_.end())
        throw std::out_of_range("AnnotationPool: unknown graph " + graph_id);
    std::map<int, int> out;
    for (size_t i = 0; i < it->second.size(); ++i)
        if (it->second[i] >= 0) out[static_cast<int>(i)] = it->second[i];
    return out;
}

std::vector<int> AnnotationPool::unlabeled_in_graph(const std::string& graph_id) const {
    auto it = states_.find(graph_id);
    if (it == states_.end())
        throw std::out_of_range("AnnotationPool: unknown graph " + graph_id);
    std::vector<int> out;
    for (size_t i = 0; i < it->second.size(); ++i)
        if (it->second[i] < 0) out.push_back(static_cast<int>(i));
    return out;
}

void commit_labels(AnnotationPool& pool, const std::vector<std::pair<NodeRef, int>>& answers) {
    // Validate everything first; apply only if the whole batch is legal.
    for (const auto& [ref, label] : answers) {
        if (pool.state_of(ref) >= 0)
            throw std::logic_error("commit_labels: node already labeled: " + ref.graph_id + "/" +
                                   std::to_string(ref.node_index));
        const int card =
            ref.is_scene() ? pool.space_.num_activities : pool.space_.num_actions;
        if (label < 0 || label >= card)
            throw std::out_of_range("commit_labels: label " + std::to_string(label) +
                                    " out of range for " + ref.graph_id + "/" +
                                    std::to_string(ref.node_index));
    }
    // Duplicate refs inside one batch would double-label a node.
    for (size_t i = 0; i < answers.size(); ++i)
        for (size_t j = i + 1; j < answers.size(); ++j)
            if (answers[i].first == answers[j].first)
                throw std::logic_error("commit_labels: duplicate node in batch");

    for (const auto& [ref, label] : answers) {
        pool.states_[ref.graph_id][static_cast<size_t>(ref.node_index)] = label;
        ++pool.labeled_count_;
    }
}

}  // namespace eeral
