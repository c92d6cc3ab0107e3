// eeral experiment runner: dataset generation, active-learning runs,
// self-verification suites, and curve aggregation.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eeral/active_loop.hpp"
#include "eeral/dataset.hpp"
#include "eeral/eval.hpp"
#include "eeral/model.hpp"
#include "eeral/selection.hpp"
#include "eeral/synthgen.hpp"
#include "eeral/threading.hpp"
#include "eeral/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerify = 2;
constexpr int kExitNumerical = 3;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Flat key=value config support. Values are appended as ordinary flags
// unless the flag already appears on the command line, so explicit flags win.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream f(path);
    if (!f) throw eeral::config_error("cannot read config file: " + path);

    auto flag_present = [&](const std::string& flag) {
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };

    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw eeral::config_error(path + ":" + std::to_string(lineno) +
                                      ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw eeral::config_error(path + ":" + std::to_string(lineno) + ": empty key");
        const std::string flag = "--" + key;
        if (flag_present(flag)) continue;
        args.push_back(flag);
        args.push_back(value);
    }
    return args;
}

struct GenFlags {
    std::string preset = "volleyball-like";
    std::string out_dir;
    std::uint64_t seed = 1;
    int graphs = -1;
    int persons_min = -1, persons_max = -1;
    double noise_sigma = -1.0;
    double initial_fraction = -1.0;
    double separation = -1.0;
    int scene_dim = -1, person_dim = -1;
};

eeral::GenConfig resolve_gen_config(const GenFlags& f) {
    eeral::GenConfig cfg = eeral::preset_by_name(f.preset);
    cfg.rng_seed = f.seed;
    if (f.graphs >= 0) cfg.num_graphs = f.graphs;
    if (f.persons_min >= 0) cfg.persons_min = f.persons_min;
    if (f.persons_max >= 0) cfg.persons_max = f.persons_max;
    if (f.noise_sigma >= 0.0) cfg.noise_sigma = f.noise_sigma;
    if (f.initial_fraction >= 0.0) cfg.initial_labeled_fraction = f.initial_fraction;
    if (f.separation >= 0.0) cfg.prototype_separation = f.separation;
    if (f.scene_dim >= 0) cfg.scene_dim = f.scene_dim;
    if (f.person_dim >= 0) cfg.person_dim = f.person_dim;
    return cfg;
}

int cmd_gen(const GenFlags& flags) {
    const eeral::GenConfig cfg = resolve_gen_config(flags);
    const eeral::Dataset ds = eeral::generate(cfg);
    eeral::save_dataset(flags.out_dir, ds);

    size_t test_nodes = 0;
    for (const auto& g : ds.test_graphs) test_nodes += static_cast<size_t>(g.num_nodes());
    std::printf("dataset written to %s\n", flags.out_dir.c_str());
    std::printf("  preset=%s seed=%llu T_s=%d T_a=%d d_s=%d d_a=%d\n", flags.preset.c_str(),
                static_cast<unsigned long long>(cfg.rng_seed), cfg.label_space.num_activities,
                cfg.label_space.num_actions, cfg.scene_dim, cfg.person_dim);
    std::printf("  train graphs=%zu (nodes=%zu, labeled=%zu) test graphs=%zu (nodes=%zu)\n",
                ds.train_graphs.size(), ds.train_node_count(), ds.pool.labeled_count(),
                ds.test_graphs.size(), test_nodes);
    return kExitOk;
}

struct RunFlags {
    std::string data_dir;
    std::string out_dir;
    std::string strategies = "eer,rnd";
    std::string seeds = "1";
    std::string preset = "volleyball-like";
    int num_activities = -1, num_actions = -1;
    int k = 50;
    int iters = 8;
    int epochs = 25;
    int batch = 16;
    double lr = 0.02;
    double lr_mult = 0.5;
    double wd = 0.05;
    double wd_mult = 0.1;
    double momentum = 0.9;
    int rounds = 5;
    double damping = 0.0;
};

int cmd_run(const RunFlags& flags) {
    eeral::LabelSpace space = eeral::preset_by_name(flags.preset).label_space;
    if (flags.num_activities > 0) space.num_activities = flags.num_activities;
    if (flags.num_actions > 0) space.num_actions = flags.num_actions;

    const eeral::Dataset ds = eeral::load_dataset(flags.data_dir, space);

    std::vector<eeral::Strategy> strategies;
    for (const auto& name : split_csv(flags.strategies)) {
        auto s = eeral::parse_strategy(name);
        if (!s) throw eeral::config_error("unknown strategy: " + name);
        strategies.push_back(*s);
    }
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_csv(flags.seeds)) seeds.push_back(std::stoull(s));
    if (strategies.empty() || seeds.empty())
        throw eeral::config_error("run: need at least one strategy and one seed");

    std::filesystem::create_directories(flags.out_dir);

    // Live progress row per iteration (includes wall time, which is why it
    // goes to stdout and not into the reproducible CSV files).
    std::printf("t,strategy,seed,labeled_total,labeled_scene,labeled_action,scene_acc,action_acc,lr,wd,seconds\n");

    for (const auto strategy : strategies) {
        for (const auto seed : seeds) {
            eeral::LoopConfig loop;
            loop.k_per_iteration = flags.k;
            loop.num_iterations = flags.iters;
            loop.strategy = strategy;
            loop.rng_seed = seed;
            loop.train.base_lr = flags.lr;
            loop.train.lr_iter_mult = flags.lr_mult;
            loop.train.weight_decay = flags.wd;
            loop.train.wd_iter_mult = flags.wd_mult;
            loop.train.momentum = flags.momentum;
            loop.train.epochs_per_iteration = flags.epochs;
            loop.train.batch = flags.batch;
            loop.train.rng_seed = seed;
            loop.infer.rounds = flags.rounds;
            loop.infer.damping = flags.damping;

            const eeral::ModelParams params0 = eeral::ModelParams::zeros(
                space, ds.train_graphs[0].scene_dim(), ds.train_graphs[0].person_dim());

            const char* sname = eeral::strategy_name(strategy);
            auto live = [&](const eeral::IterationRecord& r) {
                std::printf("%d,%s,%llu,%zu,%zu,%zu,%.6f,%.6f,%.8g,%.8g,%.3f\n", r.iteration,
                            sname, static_cast<unsigned long long>(seed), r.labeled_total,
                            r.labeled_scene, r.labeled_action, r.scene_acc, r.action_acc, r.lr,
                            r.wd, r.seconds);
                std::fflush(stdout);
            };

            const auto records = eeral::run_active_learning(ds, params0, loop, live);

            const std::string stem =
                std::string(sname) + "_s" + std::to_string(seed);

            std::vector<eeral::CurvePoint> curve;
            const size_t initial = records.front().labeled_total;
            for (const auto& r : records)
                curve.push_back({sname, seed, r.iteration, r.labeled_total - initial,
                                 r.scene_acc, r.action_acc});
            {
                std::ofstream f(flags.out_dir + "/curve_" + stem + ".csv");
                eeral::write_curve_header(f);
                eeral::write_curve_rows(f, curve);
            }
            {
                std::ofstream f(flags.out_dir + "/selection_" + stem + ".csv");
                eeral::write_selection_header(f);
                for (const auto& r : records)
                    eeral::write_selection_rows(f, r.selection, strategy);
            }
            {
                std::vector<eeral::Selection> sels;
                for (const auto& r : records)
                    if (!r.selection.chosen.empty()) sels.push_back(r.selection);
                const auto comps = eeral::selection_composition(sels, ds.truths, space);
                std::ofstream f(flags.out_dir + "/composition_" + stem + ".csv");
                eeral::write_composition_header(f);
                eeral::write_composition_rows(f, sname, seed, comps);
            }
        }
    }
    return kExitOk;
}

struct VerifyFlags {
    std::string suite = "all";
    std::uint64_t seed = 20260811;
    int trials = 0;
    bool inject_fault = false;
};

int cmd_verify(const VerifyFlags& flags) {
    eeral::VerifyOptions opt;
    opt.seed = flags.seed;
    opt.trials = flags.trials;
    opt.inject_fault = flags.inject_fault;

    const auto results = eeral::run_verify_suites(flags.suite, opt);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%s %s %.3g (observed %.6g, trials=%d, %.2fs): %s\n", r.name.c_str(),
                    r.lower_bound ? ">=" : "<", r.tolerance, r.value, r.trials, r.seconds,
                    r.pass ? "PASS" : "FAIL");
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitVerify;
}

struct AggregateFlags {
    std::string dir;
    std::string out_file;
};

int cmd_aggregate(const AggregateFlags& flags) {
    std::vector<eeral::CurvePoint> points;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(flags.dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("curve_", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw eeral::config_error("aggregate: no curve_*.csv files in " + flags.dir);
    for (const auto& path : files) {
        std::ifstream f(path);
        if (!f) throw eeral::config_error("aggregate: cannot read " + path.string());
        auto pts = eeral::read_curve_csv(f);
        points.insert(points.end(), pts.begin(), pts.end());
    }
    const auto rows = eeral::aggregate_curves(points);
    std::ofstream f(flags.out_file);
    if (!f) throw eeral::config_error("aggregate: cannot write " + flags.out_file);
    eeral::write_aggregate_csv(f, rows);
    std::printf("aggregated %zu curve points from %zu files into %s\n", points.size(),
                files.size(), flags.out_file.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    eeral::apply_thread_env();

    CLI::App app{"eeral: entropy-guided active learning on synthetic scene graphs"};
    app.require_subcommand(1);

    GenFlags gen;
    auto* cgen = app.add_subcommand("gen", "generate a synthetic dataset");
    cgen->add_option("--config", "flat key=value config file; flags override it");
    cgen->add_option("--preset", gen.preset, "volleyball-like or collective-like");
    cgen->add_option("--out", gen.out_dir, "output directory")->required();
    cgen->add_option("--seed", gen.seed, "generator seed");
    cgen->add_option("--graphs", gen.graphs, "number of graphs (train+test)");
    cgen->add_option("--persons-min", gen.persons_min, "min persons per graph");
    cgen->add_option("--persons-max", gen.persons_max, "max persons per graph");
    cgen->add_option("--noise-sigma", gen.noise_sigma, "feature noise sigma");
    cgen->add_option("--initial-fraction", gen.initial_fraction, "initially labeled node fraction");
    cgen->add_option("--separation", gen.separation, "min prototype separation");
    cgen->add_option("--scene-dim", gen.scene_dim, "scene feature dimension");
    cgen->add_option("--person-dim", gen.person_dim, "person feature dimension");

    RunFlags run;
    auto* crun = app.add_subcommand("run", "run active-learning experiments");
    crun->add_option("--config", "flat key=value config file; flags override it");
    crun->add_option("--data", run.data_dir, "dataset directory from gen")->required();
    crun->add_option("--out", run.out_dir, "output directory for CSVs")->required();
    crun->add_option("--strategy", run.strategies, "comma list: eer,sa,lc,m,ec,rnd");
    crun->add_option("--seeds", run.seeds, "comma list of seeds");
    crun->add_option("--preset", run.preset, "preset naming the label alphabets");
    crun->add_option("--num-activities", run.num_activities, "scene label count override");
    crun->add_option("--num-actions", run.num_actions, "action label count override");
    crun->add_option("--k", run.k, "annotations per iteration");
    crun->add_option("--iters", run.iters, "selection iterations");
    crun->add_option("--epochs", run.epochs, "training epochs per iteration");
    crun->add_option("--batch", run.batch, "graphs per gradient step");
    crun->add_option("--lr", run.lr, "base learning rate (per labeled node)");
    crun->add_option("--lr-mult", run.lr_mult, "learning-rate decay per iteration");
    crun->add_option("--wd", run.wd, "base weight decay");
    crun->add_option("--wd-mult", run.wd_mult, "weight-decay decay per iteration");
    crun->add_option("--momentum", run.momentum, "SGD momentum");
    crun->add_option("--rounds", run.rounds, "message-passing rounds");
    crun->add_option("--damping", run.damping, "message damping in [0,1)");

    VerifyFlags ver;
    auto* cver = app.add_subcommand("verify", "run seeded verification suites");
    cver->add_option("--config", "flat key=value config file; flags override it");
    cver->add_option("--suite", ver.suite, "all, bp, grad or eer");
    cver->add_option("--seed", ver.seed, "suite seed");
    cver->add_option("--trials", ver.trials, "trials per suite (0 = default)");
    cver->add_flag("--inject-fault", ver.inject_fault, "perturb results to exercise FAIL paths");

    AggregateFlags agg;
    auto* cagg = app.add_subcommand("aggregate", "mean/stddev across curve CSVs");
    cagg->add_option("--config", "flat key=value config file; flags override it");
    cagg->add_option("--dir", agg.dir, "directory containing curve_*.csv")->required();
    cagg->add_option("--out", agg.out_file, "output CSV path")->required();

    try {
        auto args = expand_config_args(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 vector parse order
        app.parse(std::move(args));
    } catch (const eeral::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (cgen->parsed()) return cmd_gen(gen);
        if (crun->parsed()) return cmd_run(run);
        if (cver->parsed()) return cmd_verify(ver);
        if (cagg->parsed()) return cmd_aggregate(agg);
        throw eeral::config_error("no subcommand given");
    } catch (const eeral::numerical_error& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return kExitNumerical;
    } catch (const eeral::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}
