#pragma once

// Run configuration and the end-to-end train -> rewire -> evaluate pipeline.

#include "baselines.hpp"
#include "gcn.hpp"
#include "io.hpp"
#include "learner.hpp"
#include "rewire.hpp"

#include <charconv>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace hetrewire {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_divergence = 3, exit_io = 4 };

struct RunConfig {
    fs::path dataset;
    fs::path out;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    /// Splits the pipeline runs on; empty means all of them.
    std::vector<std::size_t> splits;
    DistributionOptions distributions;
    TrainConfig train;
    RewireParams rewire;
    /// Unset: follow the dataset's undirected flag.
    std::optional<bool> symmetric_add;
    GcnConfig gcn;
    std::size_t gcn_seeds = 3;

    /// Pushes the run seed into the components that consume one.
    void resolve_seeds() { train.seed = seed; }
};

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` text, one pair per line; `#` starts a comment.
inline KeyValues parse_config_text(std::string_view text, const std::string& where = "config") {
    KeyValues kv;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw validation_error(where + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) throw validation_error(where + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

inline KeyValues parse_config_file(const fs::path& path) { return parse_config_text(read_file_bytes(path), path.string()); }

namespace detail {

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
    if constexpr (std::is_same_v<T, bool>) {
        if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
        if (value == "false" || value == "0" || value == "off" || value == "no") return false;
        throw validation_error("config key '" + key + "': expected a boolean, got '" + value + "'");
    } else if constexpr (std::is_floating_point_v<T>) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != value.size() || value.empty()) {
            throw validation_error("config key '" + key + "': expected a number, got '" + value + "'");
        }
        return static_cast<T>(v);
    } else {
        T v{};
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
            throw validation_error("config key '" + key + "': expected an integer, got '" + value + "'");
        }
        return v;
    }
}

inline std::vector<std::size_t> parse_index_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::string_view rest = value;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string item(trim(rest.substr(0, comma)));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (!item.empty()) out.push_back(parse_value<std::size_t>(key, item));
    }
    return out;
}

}  // namespace detail

/// Applies recognised keys to `cfg`; unknown keys are an error.
inline void apply_config(RunConfig& cfg, const KeyValues& kv) {
    using detail::parse_value;
    for (const auto& [key, value] : kv) {
        if (key == "dataset") cfg.dataset = value;
        else if (key == "out") cfg.out = value;
        else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(key, value);
        else if (key == "threads") cfg.threads = parse_value<unsigned>(key, value);
        else if (key == "splits") cfg.splits = detail::parse_index_list(key, value);
        else if (key == "max_order") cfg.distributions.max_order = parse_value<int>(key, value);
        else if (key == "alpha") cfg.distributions.alpha = parse_value<double>(key, value);
        else if (key == "feature_hash_dims") cfg.distributions.feature_hash_dims = parse_value<std::size_t>(key, value);
        else if (key == "epochs_pretrain") cfg.train.epochs_pretrain = parse_value<int>(key, value);
        else if (key == "epochs_finetune") cfg.train.epochs_finetune = parse_value<int>(key, value);
        else if (key == "iterations_per_epoch") cfg.train.iterations_per_epoch = parse_value<std::size_t>(key, value);
        else if (key == "finetune_iterations") cfg.train.finetune_iterations = parse_value<std::size_t>(key, value);
        else if (key == "batch_rows") cfg.train.batch_rows = parse_value<std::size_t>(key, value);
        else if (key == "batch_cols") cfg.train.batch_cols = parse_value<std::size_t>(key, value);
        else if (key == "learning_rate") cfg.train.learning_rate = parse_value<double>(key, value);
        else if (key == "weight_decay") cfg.train.weight_decay = parse_value<double>(key, value);
        else if (key == "hidden_dim") cfg.train.hidden_dim = parse_value<int>(key, value);
        else if (key == "self_concat") cfg.train.use_self_concat = parse_value<bool>(key, value);
        else if (key == "optimizer") {
            if (value == "adam") cfg.train.optimizer = OptimizerKind::adam;
            else if (value == "sgd") cfg.train.optimizer = OptimizerKind::sgd;
            else throw validation_error("config key 'optimizer': expected adam or sgd");
        } else if (key == "loss_normalization") {
            if (value == "per_cell") cfg.train.normalization = LossNormalization::per_cell;
            else if (value == "sum") cfg.train.normalization = LossNormalization::sum;
            else throw validation_error("config key 'loss_normalization': expected per_cell or sum");
        }
        else if (key == "K") cfg.rewire.max_added_per_node = parse_value<std::size_t>(key, value);
        else if (key == "epsilon") cfg.rewire.add_threshold = parse_value<double>(key, value);
        else if (key == "gamma") cfg.rewire.prune_threshold = parse_value<double>(key, value);
        else if (key == "symmetric_add") cfg.symmetric_add = parse_value<bool>(key, value);
        else if (key == "drop_original") cfg.rewire.drop_original = parse_value<bool>(key, value);
        else if (key == "gcn_hidden_dim") cfg.gcn.hidden_dim = parse_value<int>(key, value);
        else if (key == "gcn_learning_rate") cfg.gcn.learning_rate = parse_value<double>(key, value);
        else if (key == "gcn_weight_decay") cfg.gcn.weight_decay = parse_value<double>(key, value);
        else if (key == "gcn_epochs") cfg.gcn.max_epochs = parse_value<int>(key, value);
        else if (key == "gcn_dropout") cfg.gcn.dropout = parse_value<double>(key, value);
        else if (key == "gcn_normalize_features") cfg.gcn.normalize_features = parse_value<bool>(key, value);
        else if (key == "gcn_seeds") cfg.gcn_seeds = parse_value<std::size_t>(key, value);
        else throw validation_error("unknown config key '" + key + "'");
    }
}

/// HR_SEED, when set, replaces the seed.
inline void apply_environment(RunConfig& cfg) {
    if (const char* s = std::getenv("HR_SEED"); s != nullptr && *s != '\0') {
        cfg.seed = detail::parse_value<std::uint64_t>("HR_SEED", s);
    }
}

inline json to_json(const TrainConfig& t) {
    return {{"epochs_pretrain", t.epochs_pretrain},
            {"epochs_finetune", t.epochs_finetune},
            {"iterations_per_epoch", t.iterations_per_epoch},
            {"finetune_iterations", t.finetune_iterations},
            {"batch_rows", t.batch_rows},
            {"batch_cols", t.batch_cols},
            {"learning_rate", t.learning_rate},
            {"weight_decay", t.weight_decay},
            {"optimizer", t.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
            {"loss_normalization", t.normalization == LossNormalization::per_cell ? "per_cell" : "sum"},
            {"hidden_dim", t.hidden_dim},
            {"self_concat", t.use_self_concat},
            {"seed", t.seed}};
}

inline json to_json(const RewireParams& p) {
    return {{"K", p.max_added_per_node},
            {"epsilon", p.add_threshold},
            {"gamma", p.prune_threshold},
            {"symmetric_add", p.symmetric_add},
            {"drop_original", p.drop_original}};
}

inline json to_json(const GcnConfig& g) {
    return {{"hidden_dim", g.hidden_dim},   {"learning_rate", g.learning_rate}, {"weight_decay", g.weight_decay},
            {"max_epochs", g.max_epochs},   {"dropout", g.dropout},             {"normalize_features", g.normalize_features}};
}

inline json to_json(const DistributionOptions& d) {
    return {{"max_order", d.max_order}, {"alpha", d.alpha}, {"feature_hash_dims", d.feature_hash_dims}};
}

inline json to_json(const RunConfig& c) {
    return {{"dataset", c.dataset.string()},
            {"seed", c.seed},
            {"splits", c.splits},
            {"distributions", to_json(c.distributions)},
            {"train", to_json(c.train)},
            {"rewire", to_json(c.rewire)},
            {"gcn", to_json(c.gcn)},
            {"gcn_seeds", c.gcn_seeds}};
}

inline json to_json(const RewireReport& r) {
    json added = json::object();
    for (std::size_t v = 0; v < r.added_per_node.size(); ++v) {
        if (!r.added_per_node[v].empty()) added[std::to_string(v)] = r.added_per_node[v];
    }
    json j = {{"original_edges", r.original_edges},
              {"rewired_edges", r.rewired_edges},
              {"edges_added", r.edges_added},
              {"edges_pruned", r.edges_pruned},
              {"params", to_json(r.params)},
              {"checkpoint_hash", r.checkpoint_hash},
              {"added_per_node", added}};
    j["hr_before"] = r.hr_before ? json(*r.hr_before) : json(nullptr);
    j["hr_after"] = r.hr_after ? json(*r.hr_after) : json(nullptr);
    return j;
}

/// Re-throws the active exception with the stage name prefixed, keeping its
/// category.
[[noreturn]] inline void rethrow_tagged(const std::string& stage) {
    try {
        throw;
    } catch (const divergence_error& e) {
        throw divergence_error("[" + stage + "] " + e.what());
    } catch (const io_error& e) {
        throw io_error("[" + stage + "] " + e.what());
    } catch (const validation_error& e) {
        throw validation_error("[" + stage + "] " + e.what());
    } catch (const std::exception& e) {
        throw error("[" + stage + "] " + e.what());
    }
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (...) {
        rethrow_tagged(name);
    }
}

inline int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const divergence_error&) {
        return exit_divergence;
    } catch (const io_error&) {
        return exit_io;
    } catch (const validation_error&) {
        return exit_validation;
    } catch (...) {
        return 1;
    }
}

inline std::uint64_t file_hash(const fs::path& path) {
    const std::string bytes = read_file_bytes(path);
    ContentHash h;
    h.update(std::string_view(bytes));
    return h.value();
}

/// Learns similarity on one split and returns the checkpoint.
inline Checkpoint train_on_split(const Dataset& ds, std::size_t split, const RunConfig& cfg,
                                 const fs::path& telemetry = {}, std::vector<std::string>* warnings = nullptr) {
    const NeighborDistributions nd = compute_distributions(ds, ds.split(split), cfg.distributions);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    TelemetrySink sink;
    if (!telemetry.empty()) {
        detail::open_output(telemetry).close();
        sink = [&](const EpochLog& log) {
            append_json_line(telemetry, {{"split", split},
                                         {"epoch", log.epoch},
                                         {"phase", to_string(log.phase)},
                                         {"loss", log.loss},
                                         {"batches", log.batches},
                                         {"skipped", log.skipped}});
        };
    }
    TrainResult tr = train(nd, tc, sink);
    if (warnings) warnings->insert(warnings->end(), tr.warnings.begin(), tr.warnings.end());
    return Checkpoint{tr.learner, tc, cfg.distributions, split, ds.content_hash()};
}

inline RewireResult rewire_from_checkpoint(const Dataset& ds, const Checkpoint& ck, const RewireParams& params,
                                           const std::string& checkpoint_hash = {}) {
    if (ck.dataset_hash != ds.content_hash()) {
        throw validation_error("checkpoint was trained on a different dataset (hash " +
                               ContentHash::to_hex(ck.dataset_hash) + ", dataset " +
                               ContentHash::to_hex(ds.content_hash()) + ")");
    }
    const NeighborDistributions nd = compute_distributions(ds, ds.split(ck.split_index), ck.distributions);
    const EmbeddingSet e = compute_embeddings(ck.learner, nd);
    RewireResult r = rewire(ds.graph, e, params, ds.labels);
    r.report.checkpoint_hash = checkpoint_hash;
    return r;
}

struct PipelineSplitResult {
    std::size_t split = 0;
    RewireReport report;
    EvalResult original;
    EvalResult rewired;
};

struct PipelineResult {
    std::vector<PipelineSplitResult> per_split;
    double original_mean = 0.0;
    double rewired_mean = 0.0;
    double average_gain = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {
inline double mean_of_trials(const std::vector<PipelineSplitResult>& r, bool rewired) {
    std::vector<double> acc;
    for (const auto& s : r) {
        for (double a : (rewired ? s.rewired : s.original).accuracies()) acc.push_back(a);
    }
    if (acc.empty()) return 0.0;
    return std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
}
}  // namespace detail

/// For each split: learn similarity from that split's training labels, rewire,
/// and evaluate the classifier on the original and rewired graphs with the
/// same split. With a checkpoint, training is skipped and only the
/// checkpoint's split is run. Artifacts go to cfg.out when it is set.
inline PipelineResult run_pipeline(const Dataset& ds, const RunConfig& cfg,
                                   const std::optional<fs::path>& checkpoint = std::nullopt) {
    PipelineResult out;
    std::vector<std::size_t> splits = cfg.splits;
    std::optional<Checkpoint> given;
    std::string given_hash;
    if (checkpoint) {
        given = stage("load-checkpoint", [&] { return load_checkpoint(*checkpoint); });
        given_hash = ContentHash::to_hex(file_hash(*checkpoint));
        splits = {static_cast<std::size_t>(given->split_index)};
    } else if (splits.empty()) {
        splits.resize(ds.splits.size());
        std::iota(splits.begin(), splits.end(), std::size_t{0});
    }
    RewireParams params = cfg.rewire;
    params.symmetric_add = cfg.symmetric_add.value_or(ds.undirected);
    std::vector<std::uint64_t> seeds(cfg.gcn_seeds);
    std::iota(seeds.begin(), seeds.end(), cfg.seed);

    const bool write = !cfg.out.empty();
    if (write) fs::create_directories(cfg.out);
    for (std::size_t split : splits) {
        PipelineSplitResult sr;
        sr.split = split;
        const fs::path dir = write ? cfg.out / ("split_" + std::to_string(split)) : fs::path{};
        Checkpoint ck;
        std::string ck_hash = given_hash;
        if (given) {
            ck = *given;
        } else {
            ck = stage("train", [&] {
                return train_on_split(ds, split, cfg, write ? dir / "telemetry.jsonl" : fs::path{}, &out.warnings);
            });
            if (write) {
                stage("write-checkpoint", [&] {
                    save_checkpoint(dir / "checkpoint.bin", ck);
                    return 0;
                });
                ck_hash = ContentHash::to_hex(file_hash(dir / "checkpoint.bin"));
            }
        }
        RewireResult rw = stage("rewire", [&] { return rewire_from_checkpoint(ds, ck, params, ck_hash); });
        sr.report = rw.report;
        const std::size_t one_split[] = {split};
        sr.original = stage("eval-original", [&] { return gcn_train_eval(ds, nullptr, cfg.gcn, one_split, seeds); });
        sr.rewired = stage("eval-rewired", [&] { return gcn_train_eval(ds, &rw.graph, cfg.gcn, one_split, seeds); });
        if (write) {
            stage("write-artifacts", [&] {
                fs::create_directories(dir / "rewired");
                save_edges(dir / "rewired" / "edges.tsv", rw.graph);
                write_json(dir / "rewired" / "rewire_report.json", to_json(sr.report));
                write_json(dir / "eval_original.json", to_json(sr.original));
                write_json(dir / "eval_rewired.json", to_json(sr.rewired));
                return 0;
            });
        }
        out.per_split.push_back(std::move(sr));
    }
    out.original_mean = detail::mean_of_trials(out.per_split, false);
    out.rewired_mean = detail::mean_of_trials(out.per_split, true);
    const double a[] = {out.original_mean};
    const double b[] = {out.rewired_mean};
    out.average_gain = average_gain(a, b);

    if (write) {
        stage("write-summary", [&] {
            json run = to_json(cfg);
            run["rewire"]["symmetric_add"] = params.symmetric_add;
            run["splits"] = splits;
            run["dataset_hash"] = ContentHash::to_hex(ds.content_hash());
            run["checkpoint"] = checkpoint ? json(checkpoint->string()) : json(nullptr);
            run["checkpoint_hash"] = checkpoint ? json(given_hash) : json(nullptr);
            write_json(cfg.out / "run.json", run);
            json summary = {{"original_mean", out.original_mean},
                            {"rewired_mean", out.rewired_mean},
                            {"average_gain", out.average_gain},
                            {"warnings", out.warnings}};
            json per = json::array();
            for (const auto& s : out.per_split) {
                per.push_back({{"split", s.split},
                               {"original_mean", s.original.mean},
                               {"rewired_mean", s.rewired.mean},
                               {"edges_added", s.report.edges_added},
                               {"edges_pruned", s.report.edges_pruned},
                               {"hr_before", s.report.hr_before.value_or(0.0)},
                               {"hr_after", s.report.hr_after.value_or(0.0)}});
            }
            summary["splits"] = per;
            write_json(cfg.out / "summary.json", summary);
            return 0;
        });
    }
    return out;
}

}  // namespace hetrewire
