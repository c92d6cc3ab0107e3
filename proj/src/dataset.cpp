#include "eeral/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eeral {

size_t Dataset::train_node_count() const {
    size_t n = 0;
    for (const auto& g : train_graphs) n += static_cast<size_t>(g.num_nodes());
    return n;
}

char label_to_char(int label) {
    if (label >= 0 && label <= 9) return static_cast<char>('0' + label);
    if (label >= 10 && label < 36) return static_cast<char>('a' + (label - 10));
    throw config_error("label " + std::to_string(label) + " does not fit the mask alphabet");
}

int label_from_char(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'z') return 10 + (c - 'a');
    throw config_error(std::string("bad label character '") + c + "' in mask");
}

namespace {

void write_floats(std::ostream& os, std::span<const double> v) {
    char buf[40];
    for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        os << buf << (i + 1 == v.size() ? "" : " ");
    }
    os << '\n';
}

std::vector<double> read_floats(std::istream& is, int count, const std::string& ctx) {
    std::vector<double> v(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        if (!(is >> v[static_cast<size_t>(i)]))
            throw config_error("dataset: truncated float row (" + ctx + ")");
    return v;
}

}  // namespace

void save_graph_records(std::ostream& os, std::span<const SceneGraph> graphs,
                        const std::map<std::string, GroundTruth>& truths,
                        const AnnotationPool* pool) {
    for (const auto& g : graphs) {
        const GroundTruth& t = truths.at(g.id());
        os << "graph " << g.id() << ' ' << g.num_persons() << ' ' << g.scene_dim() << ' '
           << g.person_dim() << '\n';
        write_floats(os, g.scene_feature());
        for (int p = 0; p < g.num_persons(); ++p) write_floats(os, g.person_feature(p));
        os << "truth " << t.scene_label;
        for (int a : t.action_labels) os << ' ' << a;
        os << '\n';
        os << "labels ";
        for (int node = 0; node < g.num_nodes(); ++node) {
            if (pool != nullptr && pool->is_labeled({g.id(), node}))
                os << label_to_char(pool->label_of({g.id(), node}));
            else
                os << '.';
        }
        os << '\n';
    }
}

void load_graph_records(std::istream& is, const LabelSpace& space,
                        std::vector<SceneGraph>& graphs,
                        std::map<std::string, GroundTruth>& truths, AnnotationPool* pool) {
    std::string tag;
    while (is >> tag) {
        if (tag != "graph") throw config_error("dataset: expected 'graph', got '" + tag + "'");
        std::string id;
        int n = 0, ds = 0, da = 0;
        if (!(is >> id >> n >> ds >> da)) throw config_error("dataset: bad graph header");
        if (n < 1 || ds < 1 || da < 1)
            throw config_error("dataset: bad dimensions for graph " + id);

        auto scene_feat = read_floats(is, ds, id + " scene");
        std::vector<std::vector<double>> person_feats;
        person_feats.reserve(static_cast<size_t>(n));
        for (int p = 0; p < n; ++p)
            person_feats.push_back(read_floats(is, da, id + " person " + std::to_string(p)));

        if (!(is >> tag) || tag != "truth")
            throw config_error("dataset: missing truth line for graph " + id);
        GroundTruth t;
        t.graph_id = id;
        if (!(is >> t.scene_label)) throw config_error("dataset: bad truth for graph " + id);
        if (t.scene_label < 0 || t.scene_label >= space.num_activities)
            throw config_error("dataset: scene label out of range in graph " + id);
        for (int p = 0; p < n; ++p) {
            int a = 0;
            if (!(is >> a)) throw config_error("dataset: truncated truth for graph " + id);
            if (a < 0 || a >= space.num_actions)
                throw config_error("dataset: action label out of range in graph " + id);
            t.action_labels.push_back(a);
        }

        std::string mask;
        if (!(is >> tag) || tag != "labels" || !(is >> mask))
            throw config_error("dataset: missing labels line for graph " + id);
        if (static_cast<int>(mask.size()) != n + 1)
            throw config_error("dataset: mask length != N+1 for graph " + id);

        SceneGraph g(id, std::move(scene_feat), std::move(person_feats));
        if (pool != nullptr) {
            pool->add_graph(id, g.num_nodes());
            std::vector<std::pair<NodeRef, int>> answers;
            for (int node = 0; node <= n; ++node) {
                const char c = mask[static_cast<size_t>(node)];
                if (c == '.') continue;
                answers.push_back({NodeRef{id, node}, label_from_char(c)});
            }
            commit_labels(*pool, answers);
        }
        graphs.push_back(std::move(g));
        truths.emplace(id, std::move(t));
    }
}

void save_dataset(const std::string& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/train.txt");
        if (!f) throw config_error("cannot write " + dir + "/train.txt");
        save_graph_records(f, ds.train_graphs, ds.truths, &ds.pool);
    }
    {
        std::ofstream f(dir + "/test.txt");
        if (!f) throw config_error("cannot write " + dir + "/test.txt");
        save_graph_records(f, ds.test_graphs, ds.truths, nullptr);
    }
}

Dataset load_dataset(const std::string& dir, const LabelSpace& space) {
    Dataset ds(space);
    {
        std::ifstream f(dir + "/train.txt");
        if (!f) throw config_error("cannot read " + dir + "/train.txt");
        load_graph_records(f, space, ds.train_graphs, ds.truths, &ds.pool);
    }
    {
        std::ifstream f(dir + "/test.txt");
        if (!f) throw config_error("cannot read " + dir + "/test.txt");
        load_graph_records(f, space, ds.test_graphs, ds.truths, nullptr);
    }
    if (ds.train_graphs.empty()) throw config_error("dataset: no training graphs in " + dir);
    return ds;
}

}  // namespace eeral
