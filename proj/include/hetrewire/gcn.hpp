#pragma once

// Reference two-layer graph convolutional classifier used to score original
// and rewired graphs.

#include "graph.hpp"
#include "parallel.hpp"
#include "synth.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hetrewire {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct GcnConfig {
    int hidden_dim = 64;
    double learning_rate = 0.01;
    /// Applied to the first layer's parameters.
    double weight_decay = 5e-4;
    int max_epochs = 200;
    double dropout = 0.5;
    bool normalize_features = true;

    void validate() const {
        if (hidden_dim < 1) throw validation_error("gcn hidden_dim must be >= 1");
        if (!(learning_rate > 0.0)) throw validation_error("gcn learning rate must be positive");
        if (weight_decay < 0.0) throw validation_error("gcn weight decay must be non-negative");
        if (max_epochs < 1) throw validation_error("gcn max_epochs must be >= 1");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw validation_error("gcn dropout must lie in [0, 1)");
    }
};

/// Symmetric-normalized propagation with self-loops: entry (dst, src) is
/// 1 / sqrt(deg(src) * deg(dst)) with deg = in-degree + 1.
inline SparseMatrix gcn_adjacency(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> inv_sqrt(n);
    for (node_id v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.in_degree(v) + 1));
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(g.num_edges() + n);
    for (node_id v = 0; v < n; ++v) {
        t.emplace_back(v, v, inv_sqrt[v] * inv_sqrt[v]);
        for (node_id s : g.in_neighbors(v)) t.emplace_back(v, s, inv_sqrt[s] * inv_sqrt[v]);
    }
    SparseMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

/// Sparse copy of the features, each row scaled to sum 1 when requested.
inline SparseMatrix gcn_features(const Matrix& x, bool normalize) {
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double sum = 0.0;
        if (normalize) sum = x.row(i).sum();
        const double scale = (normalize && sum != 0.0) ? 1.0 / sum : 1.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (x(i, j) != 0.0) t.emplace_back(i, j, x(i, j) * scale);
        }
    }
    SparseMatrix s(x.rows(), x.cols());
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

struct EpochTrace {
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrialResult {
    std::size_t split = 0;
    std::uint64_t seed = 0;
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    int best_epoch = 0;
    bool failed = false;
    std::string message;
    std::vector<EpochTrace> trajectory;
};

struct EvalResult {
    std::vector<TrialResult> trials;
    double mean = 0.0;
    double std = 0.0;
    std::string dataset_hash;
    std::string graph_hash;
    std::vector<std::string> warnings;

    std::vector<double> accuracies() const {
        std::vector<double> out;
        for (const auto& t : trials) {
            if (!t.failed) out.push_back(t.test_accuracy);
        }
        return out;
    }
};

namespace detail {

class AdamState {
public:
    explicit AdamState(const Matrix& shape) : m_(Matrix::Zero(shape.rows(), shape.cols())), v_(m_) {}

    void step(Matrix& p, Matrix g, double lr, double wd, long long t) {
        if (wd > 0.0) g += wd * p;
        m_ = 0.9 * m_ + 0.1 * g;
        v_ = 0.999 * v_ + 0.001 * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(t));
        p.array() -= lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + 1e-8);
    }

private:
    Matrix m_;
    Matrix v_;
};

inline Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-a, a);
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    return w;
}

inline std::size_t count_correct(const Matrix& logits, std::span<const int> labels, std::span<const node_id> nodes) {
    std::size_t hits = 0;
    for (node_id v : nodes) {
        Eigen::Index arg = 0;
        logits.row(v).maxCoeff(&arg);
        hits += arg == labels[v];
    }
    return hits;
}

}  // namespace detail

/// Trains one model on `split` and reports the test accuracy at the epoch with
/// the best validation accuracy (earliest on ties). Test labels are read only
/// for that final report.
inline TrialResult gcn_trial(const SparseMatrix& adj, const SparseMatrix& x, std::span<const int> labels,
                             int num_classes, const Split& split, const GcnConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    TrialResult r;
    r.seed = seed;
    std::mt19937_64 rng(seed);
    const Eigen::Index n = adj.rows();
    const Eigen::Index h = cfg.hidden_dim;
    const Eigen::Index c = num_classes;
    const SparseMatrix adj_t = adj.transpose();

    Matrix w1 = detail::glorot(x.cols(), h, rng);
    Matrix b1 = Matrix::Zero(1, h);
    Matrix w2 = detail::glorot(h, c, rng);
    Matrix b2 = Matrix::Zero(1, c);
    detail::AdamState s_w1(w1), s_b1(b1), s_w2(w2), s_b2(b2);

    const std::vector<node_id> train = split.train_nodes();
    const std::vector<node_id> val = split.val_nodes();
    const std::vector<node_id> test = split.test_nodes();
    if (train.empty()) throw validation_error("gcn: empty train split");

    const double keep = 1.0 - cfg.dropout;
    std::bernoulli_distribution keep_draw(keep);
    double best_val = -1.0;

    auto forward_eval = [&]() -> Matrix {
        Matrix p1 = adj * Matrix(x * w1);
        p1.rowwise() += b1.row(0);
        Matrix hid = p1.cwiseMax(0.0);
        Matrix logits = adj * Matrix(hid * w2);
        logits.rowwise() += b2.row(0);
        return logits;
    };

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // Dropout on the input features.
        SparseMatrix xd = x;
        if (cfg.dropout > 0.0) {
            for (Eigen::Index i = 0; i < xd.nonZeros(); ++i) {
                xd.valuePtr()[i] = keep_draw(rng) ? xd.valuePtr()[i] / keep : 0.0;
            }
        }
        Matrix p1 = adj * Matrix(xd * w1);
        p1.rowwise() += b1.row(0);
        Matrix hid = p1.cwiseMax(0.0);
        Matrix mask = Matrix::Ones(n, h);
        if (cfg.dropout > 0.0) {
            for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep_draw(rng) ? 1.0 / keep : 0.0;
            hid.array() *= mask.array();
        }
        Matrix logits = adj * Matrix(hid * w2);
        logits.rowwise() += b2.row(0);

        // Mean cross-entropy over training nodes.
        Matrix dlogits = Matrix::Zero(n, c);
        double loss = 0.0;
        const double inv = 1.0 / static_cast<double>(train.size());
        for (node_id v : train) {
            const double mx = logits.row(v).maxCoeff();
            RowVector e = (logits.row(v).array() - mx).exp();
            const double z = e.sum();
            loss += -(logits(v, labels[v]) - mx - std::log(z));
            dlogits.row(v) = e / z * inv;
            dlogits(v, labels[v]) -= inv;
        }
        loss *= inv;
        if (!std::isfinite(loss)) {
            r.failed = true;
            r.message = "training loss became non-finite at epoch " + std::to_string(epoch);
            return r;
        }

        const Matrix db2 = dlogits.colwise().sum();
        const Matrix dq = adj_t * dlogits;
        const Matrix dw2 = hid.transpose() * dq;
        Matrix dhid = dq * w2.transpose();
        dhid.array() *= mask.array() * (p1.array() > 0.0).cast<double>();
        const Matrix db1 = dhid.colwise().sum();
        const Matrix dxw = adj_t * dhid;
        const Matrix dw1 = xd.transpose() * dxw;

        s_w1.step(w1, dw1, cfg.learning_rate, cfg.weight_decay, epoch);
        s_b1.step(b1, db1, cfg.learning_rate, cfg.weight_decay, epoch);
        s_w2.step(w2, dw2, cfg.learning_rate, 0.0, epoch);
        s_b2.step(b2, db2, cfg.learning_rate, 0.0, epoch);

        const Matrix eval_logits = forward_eval();
        const double val_acc = val.empty() ? 0.0
                                           : static_cast<double>(detail::count_correct(eval_logits, labels, val)) /
                                                 static_cast<double>(val.size());
        r.trajectory.push_back({loss, val_acc});
        if (val_acc > best_val) {
            best_val = val_acc;
            r.best_epoch = epoch;
            r.val_accuracy = val_acc;
            r.test_accuracy = test.empty() ? 0.0
                                           : static_cast<double>(detail::count_correct(eval_logits, labels, test)) /
                                                 static_cast<double>(test.size());
        }
    }
    return r;
}

inline void summarize(EvalResult& e) {
    const std::vector<double> acc = e.accuracies();
    if (acc.empty()) {
        e.mean = 0.0;
        e.std = 0.0;
        return;
    }
    e.mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
    double var = 0.0;
    for (double a : acc) var += (a - e.mean) * (a - e.mean);
    e.std = std::sqrt(var / static_cast<double>(acc.size()));
}

/// Trains and scores a model for every (split, seed) pair. `graph` replaces
/// the dataset's edges when given; features, labels and splits are reused.
inline EvalResult gcn_train_eval(const Dataset& ds, const Graph* graph, const GcnConfig& cfg,
                                 std::span<const std::size_t> splits, std::span<const std::uint64_t> seeds) {
    cfg.validate();
    const Graph& g = graph ? *graph : ds.graph;
    if (g.num_nodes() != ds.num_nodes()) {
        throw validation_error("evaluation graph has " + std::to_string(g.num_nodes()) + " nodes, dataset has " +
                               std::to_string(ds.num_nodes()));
    }
    for (std::size_t s : splits) (void)ds.split(s);
    const SparseMatrix adj = gcn_adjacency(g);
    const SparseMatrix x = gcn_features(ds.features, cfg.normalize_features);

    EvalResult out;
    out.dataset_hash = ContentHash::to_hex(ds.attributes_hash());
    out.graph_hash = ContentHash::to_hex(g.content_hash());
    out.trials.resize(splits.size() * seeds.size());
    parallel_for(out.trials.size(), 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const std::size_t split = splits[t / seeds.size()];
            const std::uint64_t seed = seeds[t % seeds.size()];
            out.trials[t] = gcn_trial(adj, x, ds.labels, ds.num_classes, ds.split(split), cfg, seed);
            out.trials[t].split = split;
        }
    });
    for (const auto& t : out.trials) {
        if (t.failed) {
            out.warnings.push_back("split " + std::to_string(t.split) + " seed " + std::to_string(t.seed) +
                                   " excluded: " + t.message);
        }
    }
    summarize(out);
    return out;
}

/// All splits of the dataset times seeds 0..num_seeds-1.
inline EvalResult gcn_train_eval(const Dataset& ds, const Graph* graph, const GcnConfig& cfg, std::size_t num_seeds = 3) {
    std::vector<std::size_t> splits(ds.splits.size());
    std::iota(splits.begin(), splits.end(), std::size_t{0});
    std::vector<std::uint64_t> seeds(num_seeds);
    std::iota(seeds.begin(), seeds.end(), std::uint64_t{0});
    return gcn_train_eval(ds, graph, cfg, splits, seeds);
}

/// Mean over models of (rewired accuracy - original accuracy).
inline double average_gain(std::span<const double> vanilla, std::span<const double> rewired) {
    if (vanilla.empty() || vanilla.size() != rewired.size()) {
        throw validation_error("average_gain needs paired, non-empty result lists (" + std::to_string(vanilla.size()) +
                               " vs " + std::to_string(rewired.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < vanilla.size(); ++i) sum += rewired[i] - vanilla[i];
    return sum / static_cast<double>(vanilla.size());
}

inline double average_gain(std::span<const EvalResult> vanilla, std::span<const EvalResult> rewired) {
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& r : vanilla) a.push_back(r.mean);
    for (const auto& r : rewired) b.push_back(r.mean);
    return average_gain(a, b);
}

namespace detail {
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = r;
        i = j + 1;
    }
    return rank;
}
}  // namespace detail

/// Spearman rank correlation with average ranks for ties; 0 when either side
/// is constant.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw validation_error("spearman needs two equal-length series");
    const auto rx = detail::average_ranks(x);
    const auto ry = detail::average_ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

struct HeatmapGrid {
    std::vector<std::size_t> ks;
    std::vector<double> ps;
    /// accuracy[i][j] for ks[i], ps[j]: mean test accuracy over the runs.
    std::vector<std::vector<double>> accuracy;
};

/// GCN accuracy on synthetic graphs over a (k, p) grid; each cell averages
/// `runs` independently built graphs and model seeds on the given split.
inline HeatmapGrid heatmap_grid(const Dataset& ds, std::span<const std::size_t> ks, std::span<const double> ps,
                                const GcnConfig& cfg, std::size_t runs = 3, std::uint64_t seed = 0,
                                std::size_t split = 0) {
    HeatmapGrid grid;
    grid.ks.assign(ks.begin(), ks.end());
    grid.ps.assign(ps.begin(), ps.end());
    grid.accuracy.assign(ks.size(), std::vector<double>(ps.size(), 0.0));
    const SparseMatrix x = gcn_features(ds.features, cfg.normalize_features);
    const Split& sp = ds.split(split);
    const std::size_t cells = ks.size() * ps.size() * runs;
    std::vector<double> acc(cells, 0.0);
    parallel_for(cells, 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const std::size_t i = t / (ps.size() * runs);
            const std::size_t j = (t / runs) % ps.size();
            const std::size_t run = t % runs;
            const SyntheticSpec spec{ks[i], ps[j], detail::mix_seed(seed, t)};
            const Graph g = build_synthetic(ds, spec);
            const TrialResult r = gcn_trial(gcn_adjacency(g), x, ds.labels, ds.num_classes, sp, cfg, run);
            acc[t] = r.failed ? 0.0 : r.test_accuracy;
        }
    });
    for (std::size_t t = 0; t < cells; ++t) {
        grid.accuracy[t / (ps.size() * runs)][(t / runs) % ps.size()] += acc[t] / static_cast<double>(runs);
    }
    return grid;
}

inline json to_json(const EvalResult& e) {
    json trials = json::array();
    for (const auto& t : e.trials) {
        json j = {{"split", t.split},
                  {"seed", t.seed},
                  {"test_accuracy", t.test_accuracy},
                  {"val_accuracy", t.val_accuracy},
                  {"best_epoch", t.best_epoch},
                  {"failed", t.failed}};
        if (t.failed) j["message"] = t.message;
        trials.push_back(j);
    }
    return {{"mean", e.mean},
            {"std", e.std},
            {"trials", trials},
            {"dataset_hash", e.dataset_hash},
            {"graph_hash", e.graph_hash},
            {"warnings", e.warnings}};
}

inline json to_json(const HeatmapGrid& g) {
    return {{"k", g.ks}, {"p", g.ps}, {"accuracy", g.accuracy}};
}

}  // namespace hetrewire
