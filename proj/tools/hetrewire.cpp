// hetrewire: command-line front end.
//
//   stats     dataset summary and homophily
//   synth     synthetic graphs with controlled degree and homophily
//   mi        mutual information between similarity signals and edge polarity
//   train     learn node-pair similarity, write a checkpoint
//   rewire    add/prune edges with a trained checkpoint
//   eval      GCN accuracy on a dataset, optionally with a replacement graph
//   pipeline  train + rewire + eval on original and rewired graphs
//   baseline  random rewiring baselines

#include <hetrewire/hetrewire.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace hetrewire;

namespace {

struct Common {
    std::string dataset;
    std::string config;
    std::vector<std::string> sets;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c, bool needs_dataset = true) {
    auto* d = app->add_option("--dataset", c.dataset, "dataset directory");
    if (needs_dataset) d->required();
    app->add_option("--config", c.config, "flat key = value config file");
    app->add_option("--set", c.sets, "extra key=value config overrides");
    app->add_option("--threads", c.threads, "worker threads (0 = available parallelism)");
    app->add_option("--seed", c.seed, "random seed");
}

/// Config file, then explicit flags, then HR_SEED.
RunConfig resolve(const Common& c, const KeyValues& flags) {
    RunConfig cfg;
    if (!c.config.empty()) apply_config(cfg, parse_config_file(c.config));
    KeyValues extra;
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw validation_error("--set expects key=value, got '" + s + "'");
        extra[s.substr(0, eq)] = s.substr(eq + 1);
    }
    apply_config(cfg, extra);
    apply_config(cfg, flags);
    if (!c.dataset.empty()) cfg.dataset = c.dataset;
    if (c.seed) cfg.seed = *c.seed;
    if (c.threads) cfg.threads = c.threads;
    apply_environment(cfg);
    cfg.resolve_seeds();
    set_num_threads(cfg.threads);
    return cfg;
}

template <typename T>
void flag_value(KeyValues& kv, const std::string& key, const std::optional<T>& v) {
    if (!v) return;
    if constexpr (std::is_same_v<T, bool>) {
        kv[key] = *v ? "true" : "false";
    } else if constexpr (std::is_same_v<T, std::string>) {
        kv[key] = *v;
    } else {
        std::ostringstream ss;
        ss << std::setprecision(17) << *v;
        kv[key] = ss.str();
    }
}

json dataset_inputs(const RunConfig& cfg, const Dataset& ds) {
    return {{"dataset", cfg.dataset.string()}, {"dataset_hash", ContentHash::to_hex(ds.content_hash())}};
}

void write_run_json(const fs::path& path, const std::string& command, const RunConfig& cfg, json inputs) {
    json run = to_json(cfg);
    run["command"] = command;
    run["inputs"] = std::move(inputs);
    write_json(path, run);
}

/// "a..b" or "a..b:step" or "a,b,c".
std::vector<double> parse_range(const std::string& s, double default_step) {
    std::vector<double> out;
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(std::stod(item));
        }
        return out;
    }
    const double lo = std::stod(s.substr(0, dots));
    std::string rest = s.substr(dots + 2);
    double step = default_step;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
        step = std::stod(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
    }
    const double hi = std::stod(rest);
    if (!(step > 0.0)) throw validation_error("range step must be positive");
    for (int i = 0;; ++i) {
        const double v = lo + step * i;
        if (v > hi + 1e-9) break;
        out.push_back(v);
    }
    return out;
}

int run_stats(const Common& c) {
    RunConfig cfg = resolve(c, {});
    LoadReport report;
    const Dataset ds = load_dataset(cfg.dataset, {}, &report);
    const HomophilySummary h = homophily_summary(ds);
    double mean_node = 0.0;
    for (double v : h.node_homophily) mean_node += v;
    if (!h.node_homophily.empty()) mean_node /= static_cast<double>(h.node_homophily.size());
    const json j = {{"num_nodes", ds.num_nodes()},
                    {"num_edges", ds.graph.num_edges()},
                    {"num_features", ds.num_features()},
                    {"num_classes", ds.num_classes},
                    {"undirected", ds.undirected},
                    {"splits", ds.splits.size()},
                    {"edge_homophily", h.edge_homophily},
                    {"mean_node_homophily", mean_node},
                    {"mean_in_degree", h.mean_in_degree},
                    {"self_loops_dropped", report.edges.self_loops_dropped},
                    {"duplicates_dropped", report.edges.duplicates_dropped},
                    {"dataset_hash", ContentHash::to_hex(ds.content_hash())}};
    std::cout << j.dump(2) << '\n';
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Similarity-guided graph rewiring toolkit"};
    app.require_subcommand(1);

    Common stats_c;
    auto* stats_cmd = app.add_subcommand("stats", "dataset summary and homophily");
    add_common(stats_cmd, stats_c);

    Common synth_c;
    std::string synth_k = "5";
    std::string synth_p = "0.5";
    std::string synth_out;
    bool synth_grid = false;
    bool synth_heatmap = false;
    std::size_t synth_runs = 3;
    auto* synth_cmd = app.add_subcommand("synth", "synthetic graphs with controlled degree and homophily");
    add_common(synth_cmd, synth_c);
    synth_cmd->add_option("-k", synth_k, "in-degree: value, list a,b or range a..b[:step] (default step 5)");
    synth_cmd->add_option("-p", synth_p, "homophily: value, list or range a..b[:step] (default step 0.2)");
    synth_cmd->add_flag("--grid", synth_grid, "emit every (k, p) cell plus manifest.json");
    synth_cmd->add_flag("--heatmap", synth_heatmap, "train the GCN on every cell and write heatmap.json");
    synth_cmd->add_option("--runs", synth_runs, "runs per heatmap cell");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();

    Common mi_c;
    int mi_order = 2;
    std::size_t mi_bins = 16;
    std::string mi_out;
    auto* mi_cmd = app.add_subcommand("mi", "mutual information between similarity signals and edge polarity");
    add_common(mi_cmd, mi_c);
    mi_cmd->add_option("--max-order", mi_order, "neighbor orders (1 or 2)");
    mi_cmd->add_option("--bins", mi_bins, "equal-width bins");
    mi_cmd->add_option("--out", mi_out, "JSON output file (default stdout)");

    Common train_c;
    std::size_t train_split = 0;
    std::string train_out;
    std::string train_telemetry;
    auto* train_cmd = app.add_subcommand("train", "learn node-pair similarity");
    add_common(train_cmd, train_c);
    train_cmd->add_option("--split", train_split, "split whose training labels guide learning");
    train_cmd->add_option("--out", train_out, "checkpoint file")->required();
    train_cmd->add_option("--telemetry", train_telemetry, "JSON-lines loss log");

    Common rw_c;
    std::string rw_checkpoint;
    std::string rw_out;
    std::optional<std::size_t> rw_k;
    std::optional<double> rw_eps;
    std::optional<double> rw_gamma;
    std::optional<bool> rw_sym;
    bool rw_drop = false;
    auto* rw_cmd = app.add_subcommand("rewire", "add and prune edges with a trained checkpoint");
    add_common(rw_cmd, rw_c);
    rw_cmd->add_option("--checkpoint", rw_checkpoint, "checkpoint file")->required();
    rw_cmd->add_option("-K", rw_k, "max edges added per node");
    rw_cmd->add_option("--epsilon", rw_eps, "growing threshold");
    rw_cmd->add_option("--gamma", rw_gamma, "pruning threshold (-1 disables)");
    rw_cmd->add_flag("--symmetric-add,!--no-symmetric-add", rw_sym, "also add reverse edges");
    rw_cmd->add_flag("--drop-original", rw_drop, "discard all original edges");
    rw_cmd->add_option("--out", rw_out, "output directory")->required();

    Common ev_c;
    std::string ev_graph;
    std::string ev_trials;
    std::string ev_log;
    auto* ev_cmd = app.add_subcommand("eval", "GCN accuracy over splits x seeds");
    add_common(ev_cmd, ev_c);
    ev_cmd->add_option("--graph", ev_graph, "replacement edges.tsv");
    ev_cmd->add_option("--trials", ev_trials, "JSON output with per-trial results")->required();
    ev_cmd->add_option("--log", ev_log, "JSON-lines run log to append to");

    Common pl_c;
    std::string pl_out;
    bool pl_skip = false;
    std::string pl_checkpoint;
    auto* pl_cmd = app.add_subcommand("pipeline", "train, rewire and evaluate");
    add_common(pl_cmd, pl_c);
    pl_cmd->add_option("--out", pl_out, "output directory")->required();
    pl_cmd->add_flag("--skip-train", pl_skip, "reuse --checkpoint instead of training");
    pl_cmd->add_option("--checkpoint", pl_checkpoint, "checkpoint to reuse");

    Common bl_c;
    std::string bl_mode = "rand-add";
    double bl_p = 0.5;
    std::size_t bl_split = 0;
    std::string bl_out;
    bool bl_eval = false;
    auto* bl_cmd = app.add_subcommand("baseline", "random rewiring baselines");
    add_common(bl_cmd, bl_c);
    bl_cmd->add_option("--mode", bl_mode, "rand-add | rand-drop | train-label-add");
    bl_cmd->add_option("--probability", bl_p, "add/drop probability");
    bl_cmd->add_option("--split", bl_split, "split providing training labels");
    bl_cmd->add_option("--out", bl_out, "output directory")->required();
    bl_cmd->add_flag("--eval", bl_eval, "also evaluate the GCN on the result");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    try {
        if (stats_cmd->parsed()) return run_stats(stats_c);

        if (synth_cmd->parsed()) {
            const RunConfig cfg = resolve(synth_c, {});
            const Dataset ds = load_dataset(cfg.dataset);
            std::vector<std::size_t> ks;
            for (double k : parse_range(synth_k, 5.0)) ks.push_back(static_cast<std::size_t>(std::lround(k)));
            std::vector<double> ps = parse_range(synth_p, 0.2);
            if (!synth_grid && !synth_heatmap) {
                ks.resize(1);
                ps.resize(1);
            }
            const fs::path out = synth_out;
            const json manifest = write_synthetic_grid(ds, ks, ps, cfg.seed, out);
            if (synth_heatmap) {
                const HeatmapGrid grid = heatmap_grid(ds, ks, ps, cfg.gcn, synth_runs, cfg.seed);
                write_json(out / "heatmap.json", to_json(grid));
            }
            write_run_json(out / "run.json", "synth", cfg, dataset_inputs(cfg, ds));
            std::cout << manifest["cells"].size() << " synthetic graphs written to " << out.string() << '\n';
            return exit_ok;
        }

        if (mi_cmd->parsed()) {
            const RunConfig cfg = resolve(mi_c, {});
            const Dataset ds = load_dataset(cfg.dataset);
            json table = json::array();
            for (const MIResult& r : mi_study(ds, mi_order, mi_bins, cfg.seed)) table.push_back(to_json(r));
            const json j = {{"dataset_hash", ContentHash::to_hex(ds.content_hash())},
                            {"pair_population", "all edges plus an equal number of uniform non-edges"},
                            {"binning", std::to_string(mi_bins) + " equal-width bins over the observed range"},
                            {"signals", table}};
            if (mi_out.empty()) {
                std::cout << j.dump(2) << '\n';
            } else {
                write_json(mi_out, j);
                write_run_json(fs::path(mi_out).string() + ".run.json", "mi", cfg, dataset_inputs(cfg, ds));
            }
            return exit_ok;
        }

        if (train_cmd->parsed()) {
            const RunConfig cfg = resolve(train_c, {});
            const Dataset ds = load_dataset(cfg.dataset);
            std::vector<std::string> warnings;
            const Checkpoint ck = stage("train", [&] {
                return train_on_split(ds, train_split, cfg, train_telemetry, &warnings);
            });
            save_checkpoint(train_out, ck);
            for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
            json inputs = dataset_inputs(cfg, ds);
            inputs["split"] = train_split;
            write_run_json(train_out + ".run.json", "train", cfg, inputs);
            std::cout << "checkpoint written to " << train_out << '\n';
            return exit_ok;
        }

        if (rw_cmd->parsed()) {
            KeyValues flags;
            flag_value(flags, "K", rw_k);
            flag_value(flags, "epsilon", rw_eps);
            flag_value(flags, "gamma", rw_gamma);
            flag_value(flags, "symmetric_add", rw_sym);
            if (rw_drop) flags["drop_original"] = "true";
            const RunConfig cfg = resolve(rw_c, flags);
            const Dataset ds = load_dataset(cfg.dataset);
            const Checkpoint ck = load_checkpoint(rw_checkpoint);
            RewireParams params = cfg.rewire;
            params.symmetric_add = cfg.symmetric_add.value_or(ds.undirected);
            const std::string ck_hash = ContentHash::to_hex(file_hash(rw_checkpoint));
            const RewireResult r = stage("rewire", [&] { return rewire_from_checkpoint(ds, ck, params, ck_hash); });
            const fs::path out = rw_out;
            save_edges(out / "edges.tsv", r.graph);
            write_json(out / "rewire_report.json", to_json(r.report));
            json inputs = dataset_inputs(cfg, ds);
            inputs["checkpoint"] = rw_checkpoint;
            inputs["checkpoint_hash"] = ck_hash;
            write_run_json(out / "run.json", "rewire", cfg, inputs);
            std::cout << "added " << r.report.edges_added << ", pruned " << r.report.edges_pruned << " edges\n";
            return exit_ok;
        }

        if (ev_cmd->parsed()) {
            const RunConfig cfg = resolve(ev_c, {});
            const Dataset ds = load_dataset(cfg.dataset);
            std::optional<Graph> g;
            if (!ev_graph.empty()) g = load_graph(ev_graph, ds.num_nodes());
            std::vector<std::size_t> splits = cfg.splits;
            if (splits.empty()) {
                splits.resize(ds.splits.size());
                std::iota(splits.begin(), splits.end(), std::size_t{0});
            }
            std::vector<std::uint64_t> seeds(cfg.gcn_seeds);
            std::iota(seeds.begin(), seeds.end(), cfg.seed);
            const EvalResult r =
                stage("eval", [&] { return gcn_train_eval(ds, g ? &*g : nullptr, cfg.gcn, splits, seeds); });
            json j = to_json(r);
            j["config"] = to_json(cfg.gcn);
            write_json(ev_trials, j);
            if (!ev_log.empty()) {
                append_json_line(ev_log, {{"dataset_hash", r.dataset_hash},
                                          {"graph_hash", r.graph_hash},
                                          {"mean", r.mean},
                                          {"std", r.std},
                                          {"trials", r.trials.size()}});
            }
            json inputs = dataset_inputs(cfg, ds);
            inputs["graph"] = ev_graph.empty() ? json(nullptr) : json(ev_graph);
            inputs["graph_hash"] = r.graph_hash;
            write_run_json(ev_trials + ".run.json", "eval", cfg, inputs);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
            std::cout << "accuracy " << r.mean << " +- " << r.std << " over " << r.accuracies().size()
                      << " trials\n";
            return exit_ok;
        }

        if (pl_cmd->parsed()) {
            KeyValues flags;
            flags["out"] = pl_out;
            const RunConfig cfg = resolve(pl_c, flags);
            if (pl_skip && pl_checkpoint.empty()) throw validation_error("--skip-train requires --checkpoint");
            const Dataset ds = stage("load", [&] { return load_dataset(cfg.dataset); });
            std::optional<fs::path> ck;
            if (pl_skip) ck = fs::path(pl_checkpoint);
            const PipelineResult r = run_pipeline(ds, cfg, ck);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
            std::cout << "original " << r.original_mean << ", rewired " << r.rewired_mean << ", gain "
                      << r.average_gain << '\n';
            return exit_ok;
        }

        if (bl_cmd->parsed()) {
            const RunConfig cfg = resolve(bl_c, {});
            const Dataset ds = load_dataset(cfg.dataset);
            BaselineParams params;
            params.mode = parse_baseline_mode(bl_mode);
            params.probability = bl_p;
            params.symmetric = ds.undirected;
            params.seed = cfg.seed;
            const Graph g = baseline_rewire(ds.graph, params, ds.labels, &ds.split(bl_split).train);
            const fs::path out = bl_out;
            save_edges(out / "edges.tsv", g);
            json report = {{"mode", bl_mode},
                           {"probability", bl_p},
                           {"original_edges", ds.graph.num_edges()},
                           {"edges", g.num_edges()},
                           {"hr_before", edge_homophily(ds.graph, ds.labels)},
                           {"hr_after", edge_homophily(g, ds.labels)}};
            if (bl_eval) {
                const std::size_t one[] = {bl_split};
                std::vector<std::uint64_t> seeds(cfg.gcn_seeds);
                std::iota(seeds.begin(), seeds.end(), cfg.seed);
                report["eval"] = to_json(gcn_train_eval(ds, &g, cfg.gcn, one, seeds));
            }
            write_json(out / "baseline_report.json", report);
            json inputs = dataset_inputs(cfg, ds);
            inputs["split"] = bl_split;
            write_run_json(out / "run.json", "baseline", cfg, inputs);
            std::cout << "baseline graph with " << g.num_edges() << " edges written to " << out.string() << '\n';
            return exit_ok;
        }
    } catch (...) {
        try {
            throw;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
        }
        return exit_code_for_current_exception();
    }
    return exit_ok;
}
