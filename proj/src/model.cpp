#include "eeral/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bp_kernel.hpp"
#include "exact_enum.hpp"

namespace eeral {

namespace {
constexpr double kProbFloor = 1e-12;
}

ModelParams ModelParams::zeros(const LabelSpace& space, int scene_dim, int person_dim) {
    space.validate();
    if (scene_dim < 1 || person_dim < 1)
        throw std::invalid_argument("ModelParams: feature dims must be positive");
    ModelParams p;
    p.w_scene = Mat(space.num_activities, scene_dim);
    p.w_action = Mat(space.num_actions, person_dim);
    p.psi_sp = Mat(space.num_activities, space.num_actions);
    p.psi_pp = Mat(space.num_actions, space.num_actions);
    return p;
}

ModelParams ModelParams::random_init(const LabelSpace& space, int scene_dim, int person_dim,
                                     double scale, std::uint64_t seed) {
    ModelParams p = zeros(space, scene_dim, person_dim);
    Rng rng(seed);
    for (Mat* m : {&p.w_scene, &p.w_action, &p.psi_sp, &p.psi_pp})
        for (double& x : m->a) x = scale * rng.gaussian();
    return p;
}

bool ModelParams::finite() const {
    return w_scene.finite() && w_action.finite() && psi_sp.finite() && psi_pp.finite();
}

bool ModelParams::same_shape(const ModelParams& o) const {
    return w_scene.same_shape(o.w_scene) && w_action.same_shape(o.w_action) &&
           psi_sp.same_shape(o.psi_sp) && psi_pp.same_shape(o.psi_pp);
}

void ModelParams::add_scaled(const ModelParams& o, double s) {
    auto acc = [s](Mat& dst, const Mat& src) {
        for (size_t i = 0; i < dst.a.size(); ++i) dst.a[i] += s * src.a[i];
    };
    acc(w_scene, o.w_scene);
    acc(w_action, o.w_action);
    acc(psi_sp, o.psi_sp);
    acc(psi_pp, o.psi_pp);
}

void ModelParams::scale(double s) {
    for (Mat* m : {&w_scene, &w_action, &psi_sp, &psi_pp})
        for (double& x : m->a) x *= s;
}

double ModelParams::max_abs() const {
    double m = 0.0;
    for (const Mat* mat : {&w_scene, &w_action, &psi_sp, &psi_pp})
        for (double x : mat->a) m = std::max(m, std::fabs(x));
    return m;
}

void TrainConfig::validate() const {
    if (base_lr <= 0.0) throw config_error("train: base_lr must be positive");
    if (lr_iter_mult <= 0.0 || lr_iter_mult > 1.0)
        throw config_error("train: lr_iter_mult must be in (0,1]");
    if (weight_decay < 0.0) throw config_error("train: weight_decay must be nonnegative");
    if (wd_iter_mult <= 0.0 || wd_iter_mult > 1.0)
        throw config_error("train: wd_iter_mult must be in (0,1]");
    if (epochs_per_iteration < 1) throw config_error("train: epochs_per_iteration must be >= 1");
    if (momentum < 0.0 || momentum >= 1.0) throw config_error("train: momentum must be in [0,1)");
    if (batch < 1) throw config_error("train: batch must be >= 1");
}

PotentialTables unary_logits(const ModelParams& params, const SceneGraph& g) {
    if (!params.finite()) throw numerical_error("unary_logits: non-finite parameters");
    PotentialTables pots;
    pots.scene_unary = matvec(params.w_scene, g.scene_feature());
    pots.person_unary.reserve(static_cast<size_t>(g.num_persons()));
    for (int p = 0; p < g.num_persons(); ++p)
        pots.person_unary.push_back(matvec(params.w_action, g.person_feature(p)));
    pots.scene_person = params.psi_sp;
    const int ta = params.psi_pp.rows;
    pots.person_person = Mat(ta, ta);
    for (int u = 0; u < ta; ++u)
        for (int v = 0; v < ta; ++v)
            pots.person_person(u, v) = 0.5 * (params.psi_pp(u, v) + params.psi_pp(v, u));
    return pots;
}

namespace {

std::vector<const SceneGraph*> to_ptrs(std::span<const SceneGraph> graphs) {
    std::vector<const SceneGraph*> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(&g);
    return out;
}

size_t count_labeled(const std::vector<const SceneGraph*>& graphs, const AnnotationPool& pool) {
    size_t n = 0;
    for (const auto* g : graphs) n += pool.labeled_in_graph(g->id()).size();
    return n;
}

double graph_loss(const ModelParams& params, const SceneGraph& g,
                  const std::map<int, int>& labeled, const InferenceConfig& cfg) {
    if (labeled.empty()) return 0.0;
    const PotentialTables pots = unary_logits(params, g);
    const Marginals m = infer(g, pots, {}, cfg);  // no clamps during training
    double acc = 0.0;
    for (const auto& [node, truth] : labeled) {
        const double p = m.dist[static_cast<size_t>(node)][static_cast<size_t>(truth)];
        acc -= std::log(std::max(p, kProbFloor));
    }
    return acc;
}

// Chain rule from potential-space adjoints back to the parameters.
void accumulate_param_grad(ModelGrad& out, const SceneGraph& g,
                           const std::vector<std::vector<double>>& d_unary, const Mat& d_sp,
                           const Mat& d_pp) {
    const auto& xs = g.scene_feature();
    for (int r = 0; r < out.w_scene.rows; ++r)
        for (int c = 0; c < out.w_scene.cols; ++c)
            out.w_scene(r, c) += d_unary[0][static_cast<size_t>(r)] * xs[static_cast<size_t>(c)];
    for (int p = 1; p <= g.num_persons(); ++p) {
        const auto& xp = g.person_feature(p - 1);
        const auto& du = d_unary[static_cast<size_t>(p)];
        for (int r = 0; r < out.w_action.rows; ++r)
            for (int c = 0; c < out.w_action.cols; ++c)
                out.w_action(r, c) += du[static_cast<size_t>(r)] * xp[static_cast<size_t>(c)];
    }
    for (size_t i = 0; i < out.psi_sp.a.size(); ++i) out.psi_sp.a[i] += d_sp.a[i];
    // pots.person_person = (psi_pp + psi_pp^T)/2
    for (int u = 0; u < out.psi_pp.rows; ++u)
        for (int v = 0; v < out.psi_pp.cols; ++v)
            out.psi_pp(u, v) += 0.5 * (d_pp(u, v) + d_pp(v, u));
}

ModelGrad graph_gradient(const ModelParams& params, const SceneGraph& g,
                         const std::map<int, int>& labeled, const InferenceConfig& cfg) {
    ModelGrad grad = params;
    grad.scale(0.0);
    if (labeled.empty()) return grad;
    const PotentialTables pots = unary_logits(params, g);

    if (cfg.backend == Backend::SumProduct) {
        auto run = detail::bp_forward(g, pots, {}, cfg.rounds, cfg.damping, /*keep_trace=*/true);
        std::vector<std::vector<double>> seed(run.belief.size());
        for (size_t n = 0; n < run.belief.size(); ++n)
            seed[n].assign(run.belief[n].size(), 0.0);
        for (const auto& [node, truth] : labeled) {
            const auto& b = run.belief[static_cast<size_t>(node)];
            if (b[static_cast<size_t>(truth)] <= kProbFloor) continue;  // flat region of the floor
            auto& s = seed[static_cast<size_t>(node)];
            for (size_t t = 0; t < b.size(); ++t) s[t] += b[t];
            s[static_cast<size_t>(truth)] -= 1.0;
        }
        auto back = detail::bp_backward(g, pots, run, seed, cfg.rounds, cfg.damping);
        accumulate_param_grad(grad, g, back.d_unary, back.d_scene_person, back.d_person_person);
    } else {
        // -log P(y_l = y*) = log Z - log Z(clamped), so the gradient is the
        // difference of expected sufficient statistics.
        auto base = detail::exact_stats(g, pots, {}, 10'000'000, /*want_pairs=*/true);
        const int ts = static_cast<int>(pots.scene_unary.size());
        const int ta = static_cast<int>(pots.person_unary[0].size());
        std::vector<std::vector<double>> d_unary(static_cast<size_t>(g.num_nodes()));
        d_unary[0].assign(static_cast<size_t>(ts), 0.0);
        for (int p = 1; p <= g.num_persons(); ++p)
            d_unary[static_cast<size_t>(p)].assign(static_cast<size_t>(ta), 0.0);
        Mat d_sp(ts, ta), d_pp(ta, ta);

        for (const auto& [node, truth] : labeled) {
            if (base.node_marg[static_cast<size_t>(node)][static_cast<size_t>(truth)] <= kProbFloor)
                continue;
            auto cond =
                detail::exact_stats(g, pots, {{node, truth}}, 10'000'000, /*want_pairs=*/true);
            for (size_t n = 0; n < d_unary.size(); ++n)
                for (size_t t = 0; t < d_unary[n].size(); ++t)
                    d_unary[n][t] += base.node_marg[n][t] - cond.node_marg[n][t];
            for (size_t i = 0; i < d_sp.a.size(); ++i)
                d_sp.a[i] += base.pair_sp.a[i] - cond.pair_sp.a[i];
            for (size_t i = 0; i < d_pp.a.size(); ++i)
                d_pp.a[i] += base.pair_pp.a[i] - cond.pair_pp.a[i];
        }
        accumulate_param_grad(grad, g, d_unary, d_sp, d_pp);
    }
    return grad;
}

ModelGrad gradient_impl(const ModelParams& params, const std::vector<const SceneGraph*>& graphs,
                        const AnnotationPool& pool, const InferenceConfig& cfg, bool parallel) {
    if (count_labeled(graphs, pool) == 0)
        throw std::invalid_argument("loss_gradient: no labeled nodes in the given graphs");

    std::vector<ModelGrad> partial(graphs.size(), [&] {
        ModelGrad z = params;
        z.scale(0.0);
        return z;
    }());

    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(graphs.size()); ++i) {
            const auto* g = graphs[static_cast<size_t>(i)];
            partial[static_cast<size_t>(i)] =
                graph_gradient(params, *g, pool.labeled_in_graph(g->id()), cfg);
        }
    } else {
        for (size_t i = 0; i < graphs.size(); ++i) {
            const auto* g = graphs[i];
            partial[i] = graph_gradient(params, *g, pool.labeled_in_graph(g->id()), cfg);
        }
    }

    ModelGrad total = params;
    total.scale(0.0);
    for (const auto& p : partial) total.add_scaled(p, 1.0);  // fixed graph order
    return total;
}

}  // namespace

double loss(const ModelParams& params, std::span<const SceneGraph> graphs,
            const AnnotationPool& pool, const InferenceConfig& cfg) {
    return loss(params, to_ptrs(graphs), pool, cfg);
}

double loss(const ModelParams& params, const std::vector<const SceneGraph*>& graphs,
            const AnnotationPool& pool, const InferenceConfig& cfg) {
    if (count_labeled(graphs, pool) == 0)
        throw std::invalid_argument("loss: no labeled nodes in the given graphs");
    std::vector<double> partial(graphs.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(graphs.size()); ++i) {
        const auto* g = graphs[static_cast<size_t>(i)];
        partial[static_cast<size_t>(i)] =
            graph_loss(params, *g, pool.labeled_in_graph(g->id()), cfg);
    }
    double total = 0.0;
    for (double x : partial) total += x;
    return total;
}

ModelGrad loss_gradient(const ModelParams& params, std::span<const SceneGraph> graphs,
                        const AnnotationPool& pool, const InferenceConfig& cfg) {
    return gradient_impl(params, to_ptrs(graphs), pool, cfg, /*parallel=*/true);
}

ModelGrad loss_gradient(const ModelParams& params, const std::vector<const SceneGraph*>& graphs,
                        const AnnotationPool& pool, const InferenceConfig& cfg) {
    return gradient_impl(params, graphs, pool, cfg, /*parallel=*/true);
}

namespace serial {
ModelGrad loss_gradient(const ModelParams& params, const std::vector<const SceneGraph*>& graphs,
                        const AnnotationPool& pool, const InferenceConfig& cfg) {
    return gradient_impl(params, graphs, pool, cfg, /*parallel=*/false);
}
}  // namespace serial

SgdState::SgdState(const ModelParams& like) : velocity(like) { velocity.scale(0.0); }

ModelParams train_step(const ModelParams& params, SgdState& state,
                       const std::vector<const SceneGraph*>& graphs, const AnnotationPool& pool,
                       const TrainConfig& tcfg, const InferenceConfig& icfg, double effective_lr,
                       double effective_wd) {
    if (effective_lr < 0.0) throw std::invalid_argument("train_step: effective_lr must be >= 0");
    ModelGrad grad = loss_gradient(params, graphs, pool, icfg);
    if (!grad.finite())
        throw numerical_error("train_step: non-finite gradient (max |param| = " +
                              std::to_string(params.max_abs()) + ")");
    // v <- momentum*v + (grad + wd*params)
    state.velocity.scale(tcfg.momentum);
    state.velocity.add_scaled(grad, 1.0);
    state.velocity.add_scaled(params, effective_wd);
    ModelParams next = params;
    next.add_scaled(state.velocity, -effective_lr);
    if (!next.finite()) throw numerical_error("train_step: parameters became non-finite");
    return next;
}

std::pair<double, double> schedule(int iteration, const TrainConfig& cfg) {
    if (iteration < 0) throw std::invalid_argument("schedule: negative iteration");
    const double lr = cfg.base_lr * std::pow(cfg.lr_iter_mult, iteration);
    const double wd = cfg.weight_decay * std::pow(cfg.wd_iter_mult, iteration);
    return {lr, wd};
}

void train_iteration(ModelParams& params, std::span<const SceneGraph> graphs,
                     const AnnotationPool& pool, const TrainConfig& tcfg,
                     const InferenceConfig& icfg, int iteration) {
    tcfg.validate();
    const auto [lr, wd] = schedule(iteration, tcfg);
    SgdState state(params);  // fresh solver each iteration
    Rng shuffle_rng(mix_seed(tcfg.rng_seed, static_cast<std::uint64_t>(iteration)));

    std::vector<int> order(graphs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < tcfg.epochs_per_iteration; ++epoch) {
        // Fisher-Yates with our own RNG keeps the permutation stream pinned.
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)],
                      order[static_cast<size_t>(shuffle_rng.uniform_int(0, i))]);

        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(tcfg.batch)) {
            const size_t end = std::min(order.size(), start + static_cast<size_t>(tcfg.batch));
            std::vector<const SceneGraph*> batch;
            size_t labeled = 0;
            for (size_t i = start; i < end; ++i) {
                const SceneGraph& g = graphs[static_cast<size_t>(order[i])];
                const size_t l = pool.labeled_in_graph(g.id()).size();
                if (l == 0) continue;
                labeled += l;
                batch.push_back(&g);
            }
            if (batch.empty()) continue;
            params = train_step(params, state, batch, pool, tcfg, icfg,
                                lr / static_cast<double>(labeled), wd);
        }
    }
}

namespace {

void write_mat_rows(std::ostream& os, const Mat& m) {
    char buf[40];
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            os << buf << (c + 1 == m.cols ? "" : " ");
        }
        os << '\n';
    }
}

Mat read_mat_rows(std::istream& is, int rows, int cols, const char* what) {
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (!(is >> m(r, c)))
                throw config_error(std::string("checkpoint: truncated ") + what);
    return m;
}

}  // namespace

void save_params(std::ostream& os, const ModelParams& params) {
    os << "params " << params.w_scene.rows << ' ' << params.w_action.rows << ' '
       << params.w_scene.cols << ' ' << params.w_action.cols << '\n';
    write_mat_rows(os, params.w_scene);
    write_mat_rows(os, params.w_action);
    write_mat_rows(os, params.psi_sp);
    write_mat_rows(os, params.psi_pp);
}

ModelParams load_params(std::istream& is) {
    std::string tag;
    int ts = 0, ta = 0, ds = 0, da = 0;
    if (!(is >> tag >> ts >> ta >> ds >> da) || tag != "params")
        throw config_error("checkpoint: bad header");
    if (ts < 2 || ta < 2 || ds < 1 || da < 1) throw config_error("checkpoint: bad dimensions");
    ModelParams p;
    p.w_scene = read_mat_rows(is, ts, ds, "w_scene");
    p.w_action = read_mat_rows(is, ta, da, "w_action");
    p.psi_sp = read_mat_rows(is, ts, ta, "psi_sp");
    p.psi_pp = read_mat_rows(is, ta, ta, "psi_pp");
    return p;
}

void save_params_file(const std::string& path, const ModelParams& params) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot write checkpoint: " + path);
    save_params(f, params);
}

ModelParams load_params_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot read checkpoint: " + path);
    return load_params(f);
}

}  // namespace eeral
