#pragma once

// Similarity learner: a linear map W applied to propagated features, scored by
// the product over neighbor orders of decentralized cosines, and fitted to the
// feature-distribution targets (pretraining) and then to the masked
// label-distribution targets (finetuning) with stochastic k1 x k2 blocks.

#include "binary_io.hpp"
#include "distributions.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace hetrewire {

enum class Phase { pretrain, finetune };
enum class OptimizerKind { adam, sgd };
enum class LossNormalization { per_cell, sum };

inline const char* to_string(Phase p) { return p == Phase::pretrain ? "pretrain" : "finetune"; }

struct TrainConfig {
    int epochs_pretrain = 200;
    int epochs_finetune = 30;
    /// Pretraining iterations per epoch; 0 means ceil(N / batch_rows).
    std::size_t iterations_per_epoch = 0;
    /// Finetuning batches per epoch; 0 means ceil(|V_Y| / batch_rows).
    std::size_t finetune_iterations = 0;
    /// Batch shape k1 x k2, clamped to the size of the population sampled from.
    std::size_t batch_rows = 5000;
    std::size_t batch_cols = 5000;
    double learning_rate = 1e-3;
    double weight_decay = 5e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    LossNormalization normalization = LossNormalization::per_cell;
    int hidden_dim = 128;
    bool use_self_concat = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_rows < 1 || batch_cols < 1) throw validation_error("batch sizes must be >= 1");
        if (!(learning_rate > 0.0)) throw validation_error("learning rate must be positive");
        if (weight_decay < 0.0) throw validation_error("weight decay must be non-negative");
        if (hidden_dim < 2) throw validation_error("hidden_dim must be >= 2");
        if (epochs_pretrain < 0 || epochs_finetune < 0) throw validation_error("epoch counts must be >= 0");
    }
};

namespace detail {
inline std::uint64_t next_weight_version() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}
}  // namespace detail

struct SimilarityLearner {
    Matrix weight;  // D x d
    bool use_self_concat = true;
    int max_order = 2;
    int hidden_dim = 0;
    std::uint64_t seed = 0;
    /// Changes whenever `weight` does; embeddings remember the version they
    /// were computed from.
    std::uint64_t version = 0;

    void touch() { version = detail::next_weight_version(); }
};

/// Glorot-uniform initialization.
inline SimilarityLearner init_learner(std::size_t input_dim, int max_order, const TrainConfig& cfg) {
    cfg.validate();
    check_max_order(max_order);
    SimilarityLearner l;
    l.use_self_concat = cfg.use_self_concat;
    l.max_order = max_order;
    l.hidden_dim = cfg.hidden_dim;
    l.seed = cfg.seed;
    std::mt19937_64 rng(cfg.seed ^ 0x1ea4e5ULL);
    const double bound = std::sqrt(6.0 / static_cast<double>(input_dim + static_cast<std::size_t>(cfg.hidden_dim)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    l.weight.resize(static_cast<Eigen::Index>(input_dim), cfg.hidden_dim);
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = dist(rng);
    l.touch();
    return l;
}

// ---------------------------------------------------------------------------
// Whole-graph embeddings (all-node decentralization)
// ---------------------------------------------------------------------------

struct EmbeddingSet {
    /// Per order: centered embedding rows [(D^{-1}A)^k X W | X W], scaled to
    /// unit length (zero rows when degenerate).
    std::vector<Matrix> unit;
    std::uint64_t weight_version = 0;

    std::size_t num_nodes() const { return unit.empty() ? 0 : static_cast<std::size_t>(unit.front().rows()); }
    int max_order() const { return static_cast<int>(unit.size()); }
};

inline EmbeddingSet compute_embeddings(const SimilarityLearner& l, const NeighborDistributions& nd) {
    if (nd.max_order != l.max_order) throw validation_error("learner and distributions disagree on max order");
    if (nd.base_features.cols() != l.weight.rows()) {
        throw validation_error("learner input width " + std::to_string(l.weight.rows()) + " != feature width " +
                               std::to_string(nd.base_features.cols()));
    }
    EmbeddingSet e;
    e.weight_version = l.version;
    Matrix self;
    if (l.use_self_concat) {
        self = (nd.base_features.rowwise() - column_mean(nd.base_features)) * l.weight;
    }
    for (int k = 0; k < l.max_order; ++k) {
        const Matrix& f = nd.feat_dist[static_cast<std::size_t>(k)];
        Matrix z = (f.rowwise() - column_mean(f)) * l.weight;
        if (l.use_self_concat) {
            Matrix cat(z.rows(), 2 * z.cols());
            cat << z, self;
            z = std::move(cat);
        }
        // Already centered: the mean of a linear map is the map of the mean.
        e.unit.push_back(centered_unit_rows(z, RowVector::Zero(z.cols())));
    }
    return e;
}

/// S[i, j] = product over orders of the cosine between embedding rows.
inline Matrix learned_similarity_block(const SimilarityLearner& l, const EmbeddingSet& e,
                                       std::span<const node_id> rows, std::span<const node_id> cols) {
    if (e.weight_version != l.version) {
        throw stale_embeddings_error("embeddings were computed for a different weight version");
    }
    check_ids(rows, e.num_nodes());
    check_ids(cols, e.num_nodes());
    return product_of_cosines(e.unit, rows, cols);
}

/// Similarity of a single pair.
inline double pair_similarity(const EmbeddingSet& e, node_id a, node_id b) {
    double s = 1.0;
    for (const Matrix& u : e.unit) s *= u.row(a).dot(u.row(b));
    return s;
}

// ---------------------------------------------------------------------------
// Loss and gradient on a block
// ---------------------------------------------------------------------------

struct LossValue {
    double value = 0.0;
    std::size_t cells = 0;
    /// Finetuning block without a single valid cell: nothing to learn from.
    bool skipped = false;
};

/// Squared Frobenius distance to the phase's target, masked in finetuning.
/// With per-cell normalization the sum is divided by the contributing cells.
inline LossValue loss(const Matrix& s, const TargetSimilarityBlock& t, Phase phase,
                      LossNormalization norm = LossNormalization::per_cell) {
    const Matrix& target = phase == Phase::pretrain ? t.s_x : t.s_y;
    if (s.rows() != target.rows() || s.cols() != target.cols()) {
        throw validation_error("loss: similarity block and target shapes differ");
    }
    LossValue out;
    if (phase == Phase::pretrain) {
        out.value = (s - target).squaredNorm();
        out.cells = static_cast<std::size_t>(s.size());
    } else {
        out.cells = t.valid_cells();
        if (out.cells == 0) {
            out.skipped = true;
            return out;
        }
        out.value = ((s - target).array() * t.y_valid.cast<double>().array()).matrix().squaredNorm();
    }
    if (norm == LossNormalization::per_cell && out.cells > 0) out.value /= static_cast<double>(out.cells);
    return out;
}

struct BatchGradient {
    LossValue loss;
    Matrix grad;        // dLoss/dW, D x d
    Matrix similarity;  // S on the block
};

namespace detail {

// Centered inputs of one side of a block, per order, plus the self branch.
struct BlockInputs {
    std::vector<Matrix> order;
    Matrix self;
};

inline BlockInputs centered_block_inputs(const NeighborDistributions& nd, bool self_concat,
                                         std::span<const node_id> ids, const std::vector<RowVector>& order_means,
                                         const RowVector& self_mean) {
    BlockInputs in;
    for (std::size_t k = 0; k < nd.feat_dist.size(); ++k) {
        in.order.push_back(gather_rows(nd.feat_dist[k], ids).rowwise() - order_means[k]);
    }
    if (self_concat) in.self = gather_rows(nd.base_features, ids).rowwise() - self_mean;
    return in;
}

// Unit rows and norms of the embeddings of one side for one order.
struct SideEmbedding {
    Matrix unit;
    Vector norm;
};

inline SideEmbedding embed_side(const Matrix& order_in, const Matrix* self_proj, const Matrix& w) {
    Matrix z = order_in * w;
    if (self_proj) {
        Matrix cat(z.rows(), z.cols() + self_proj->cols());
        cat << z, *self_proj;
        z = std::move(cat);
    }
    SideEmbedding s{std::move(z), Vector(0)};
    s.norm.resize(s.unit.rows());
    for (Eigen::Index i = 0; i < s.unit.rows(); ++i) {
        const double n = s.unit.row(i).norm();
        s.norm[i] = n;
        if (n < kDegenerateNorm) {
            s.unit.row(i).setZero();
        } else {
            s.unit.row(i) /= n;
        }
    }
    return s;
}

// Backpropagates d(loss)/d(unit rows) to d(loss)/d(raw rows).
inline Matrix through_normalization(const SideEmbedding& s, const Matrix& d_unit) {
    Matrix out(d_unit.rows(), d_unit.cols());
    for (Eigen::Index i = 0; i < d_unit.rows(); ++i) {
        if (s.norm[i] < kDegenerateNorm) {
            out.row(i).setZero();
            continue;
        }
        const double radial = s.unit.row(i).dot(d_unit.row(i));
        out.row(i) = (d_unit.row(i) - radial * s.unit.row(i)) / s.norm[i];
    }
    return out;
}

}  // namespace detail

/// Sorted union of two id lists.
inline std::vector<node_id> node_union(std::span<const node_id> a, std::span<const node_id> b) {
    std::vector<node_id> u(a.begin(), a.end());
    u.insert(u.end(), b.begin(), b.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

/// Loss and exact dLoss/dW on the rows x cols block.
///
/// Embeddings are decentralized with the mean over rows ∪ cols. That mean is a
/// linear function of W, so centering the inputs first and multiplying by W
/// afterwards gives the same embeddings and the gradient below accounts for it
/// exactly. When rows ∪ cols covers every node this is the all-node mean.
inline BatchGradient loss_gradient(const SimilarityLearner& l, const NeighborDistributions& nd,
                                   const TargetSimilarityBlock& t, Phase phase,
                                   LossNormalization norm = LossNormalization::per_cell) {
    if (nd.max_order != l.max_order) throw validation_error("learner and distributions disagree on max order");
    const std::span<const node_id> rows = t.rows;
    const std::span<const node_id> cols = t.cols;
    check_ids(rows, nd.num_nodes());
    check_ids(cols, nd.num_nodes());

    const std::vector<node_id> batch = node_union(rows, cols);
    std::vector<RowVector> order_means;
    for (const Matrix& f : nd.feat_dist) order_means.push_back(gather_rows(f, batch).colwise().mean());
    RowVector self_mean;
    if (l.use_self_concat) self_mean = gather_rows(nd.base_features, batch).colwise().mean();

    const auto a = detail::centered_block_inputs(nd, l.use_self_concat, rows, order_means, self_mean);
    const auto b = detail::centered_block_inputs(nd, l.use_self_concat, cols, order_means, self_mean);

    Matrix a_self_proj;
    Matrix b_self_proj;
    if (l.use_self_concat) {
        a_self_proj = a.self * l.weight;
        b_self_proj = b.self * l.weight;
    }

    const auto orders = static_cast<std::size_t>(l.max_order);
    std::vector<detail::SideEmbedding> ea;
    std::vector<detail::SideEmbedding> eb;
    std::vector<Matrix> cos;
    BatchGradient out;
    out.similarity = Matrix::Ones(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < orders; ++k) {
        ea.push_back(detail::embed_side(a.order[k], l.use_self_concat ? &a_self_proj : nullptr, l.weight));
        eb.push_back(detail::embed_side(b.order[k], l.use_self_concat ? &b_self_proj : nullptr, l.weight));
        cos.push_back(ea[k].unit * eb[k].unit.transpose());
        out.similarity.array() *= cos[k].array();
    }

    out.loss = loss(out.similarity, t, phase, norm);
    out.grad = Matrix::Zero(l.weight.rows(), l.weight.cols());
    if (out.loss.skipped) return out;

    // dLoss/dS
    const Matrix& target = phase == Phase::pretrain ? t.s_x : t.s_y;
    double scale = 2.0;
    if (norm == LossNormalization::per_cell) scale /= static_cast<double>(out.loss.cells);
    Matrix g = scale * (out.similarity - target);
    if (phase == Phase::finetune) g.array() *= t.y_valid.cast<double>().array();

    const Eigen::Index d = l.weight.cols();
    Matrix self_grad_a;
    Matrix self_grad_b;
    if (l.use_self_concat) {
        self_grad_a = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), d);
        self_grad_b = Matrix::Zero(static_cast<Eigen::Index>(cols.size()), d);
    }
    for (std::size_t k = 0; k < orders; ++k) {
        Matrix gk = g;
        for (std::size_t other = 0; other < orders; ++other) {
            if (other != k) gk.array() *= cos[other].array();
        }
        const Matrix da = detail::through_normalization(ea[k], gk * eb[k].unit);
        const Matrix db = detail::through_normalization(eb[k], gk.transpose() * ea[k].unit);
        out.grad.noalias() += a.order[k].transpose() * da.leftCols(d);
        out.grad.noalias() += b.order[k].transpose() * db.leftCols(d);
        if (l.use_self_concat) {
            self_grad_a += da.rightCols(d);
            self_grad_b += db.rightCols(d);
        }
    }
    if (l.use_self_concat) {
        out.grad.noalias() += a.self.transpose() * self_grad_a;
        out.grad.noalias() += b.self.transpose() * self_grad_b;
    }
    if (!out.grad.allFinite()) {
        throw divergence_error(std::string("non-finite gradient during ") + to_string(phase));
    }
    return out;
}

/// Loss alone, with the same batch decentralization as `loss_gradient`.
inline LossValue batch_loss(const SimilarityLearner& l, const NeighborDistributions& nd,
                            const TargetSimilarityBlock& t, Phase phase,
                            LossNormalization norm = LossNormalization::per_cell) {
    return loss_gradient(l, nd, t, phase, norm).loss;
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, Eigen::Index rows, Eigen::Index cols)
        : kind_(cfg.optimizer), lr_(cfg.learning_rate), weight_decay_(cfg.weight_decay),
          m_(Matrix::Zero(rows, cols)), v_(Matrix::Zero(rows, cols)) {}

    /// L2 weight decay is folded into the gradient.
    void step(Matrix& w, const Matrix& grad) {
        Matrix g = grad;
        if (weight_decay_ > 0.0) g += weight_decay_ * w;
        if (kind_ == OptimizerKind::sgd) {
            w -= lr_ * g;
            return;
        }
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * g;
        v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        w.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
    }

private:
    OptimizerKind kind_;
    double lr_;
    double weight_decay_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long long t_ = 0;
    Matrix m_;
    Matrix v_;
};

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

/// Uniform sample of min(k, population.size()) distinct entries, sorted.
/// Floyd's algorithm: O(k) draws regardless of the population size.
template <typename Rng>
std::vector<node_id> sample_distinct(std::span<const node_id> population, std::size_t k, Rng& rng) {
    const std::size_t n = population.size();
    k = std::min(k, n);
    std::vector<node_id> out;
    out.reserve(k);
    if (k == n) {
        out.assign(population.begin(), population.end());
        std::sort(out.begin(), out.end());
        return out;
    }
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(2 * k);
    for (std::size_t j = n - k; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, j);
        const std::size_t t = pick(rng);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    for (std::size_t idx : chosen) out.push_back(population[idx]);
    std::sort(out.begin(), out.end());
    return out;
}

/// Same as above over the implicit population 0..n-1.
template <typename Rng>
std::vector<node_id> sample_distinct(std::size_t n, std::size_t k, Rng& rng) {
    k = std::min(k, n);
    std::vector<node_id> out;
    out.reserve(k);
    if (k == n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<node_id>(i));
        return out;
    }
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(2 * k);
    for (std::size_t j = n - k; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, j);
        const std::size_t t = pick(rng);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    for (std::size_t idx : chosen) out.push_back(static_cast<node_id>(idx));
    std::sort(out.begin(), out.end());
    return out;
}

struct EpochLog {
    Phase phase = Phase::pretrain;
    int epoch = 0;
    double loss = 0.0;  // mean over non-skipped batches
    std::size_t batches = 0;
    std::size_t skipped = 0;
};

struct TrainResult {
    SimilarityLearner learner;
    std::vector<EpochLog> history;
    std::vector<std::string> warnings;
};

using TelemetrySink = std::function<void(const EpochLog&)>;

inline TrainResult train(const NeighborDistributions& nd, const TrainConfig& cfg, const TelemetrySink& sink = {}) {
    cfg.validate();
    const std::size_t n = nd.num_nodes();
    TrainResult out;
    out.learner = init_learner(static_cast<std::size_t>(nd.base_features.cols()), nd.max_order, cfg);
    SimilarityLearner& l = out.learner;
    Optimizer opt(cfg, l.weight.rows(), l.weight.cols());
    std::mt19937_64 rng(cfg.seed);

    auto run_phase = [&](Phase phase, int epochs, std::span<const node_id> population, std::size_t iterations) {
        for (int epoch = 1; epoch <= epochs; ++epoch) {
            EpochLog log{phase, epoch, 0.0, 0, 0};
            double total = 0.0;
            for (std::size_t it = 0; it < iterations; ++it) {
                std::vector<node_id> rows;
                std::vector<node_id> cols;
                if (population.empty()) {
                    rows = sample_distinct(n, cfg.batch_rows, rng);
                    cols = sample_distinct(n, cfg.batch_cols, rng);
                } else {
                    rows = sample_distinct(population, cfg.batch_rows, rng);
                    cols = sample_distinct(population, cfg.batch_cols, rng);
                }
                const TargetSimilarityBlock target = target_block(nd, rows, cols);
                BatchGradient bg = loss_gradient(l, nd, target, phase, cfg.normalization);
                if (bg.loss.skipped) {
                    ++log.skipped;
                    continue;
                }
                if (!std::isfinite(bg.loss.value)) {
                    throw divergence_error(std::string("loss became non-finite during ") + to_string(phase));
                }
                opt.step(l.weight, bg.grad);
                if (!l.weight.allFinite()) throw divergence_error("weights became non-finite");
                l.touch();
                total += bg.loss.value;
                ++log.batches;
            }
            log.loss = log.batches ? total / static_cast<double>(log.batches) : 0.0;
            out.history.push_back(log);
            if (sink) sink(log);
        }
    };

    const std::size_t pre_iters =
        cfg.iterations_per_epoch ? cfg.iterations_per_epoch : (n + cfg.batch_rows - 1) / cfg.batch_rows;
    run_phase(Phase::pretrain, cfg.epochs_pretrain, {}, pre_iters);

    if (cfg.epochs_finetune > 0) {
        const std::vector<node_id> masked = nd.masked_nodes();
        if (masked.empty()) {
            out.warnings.push_back("no node passes the label mask; finetuning skipped");
        } else {
            const std::size_t ft_iters = cfg.finetune_iterations
                                             ? cfg.finetune_iterations
                                             : (masked.size() + cfg.batch_rows - 1) / cfg.batch_rows;
            run_phase(Phase::finetune, cfg.epochs_finetune, masked, ft_iters);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct Checkpoint {
    SimilarityLearner learner;
    TrainConfig config;
    DistributionOptions distributions;
    std::uint64_t split_index = 0;
    std::uint64_t dataset_hash = 0;
};

inline constexpr std::uint32_t kCheckpointMagic = 0x4b435248;  // "HRCK"
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    binary::Writer w(path);
    w.pod(kCheckpointMagic).pod(kCheckpointVersion).pod(c.dataset_hash).pod(c.split_index);
    const TrainConfig& t = c.config;
    w.pod(static_cast<std::int64_t>(t.epochs_pretrain)).pod(static_cast<std::int64_t>(t.epochs_finetune));
    w.pod(static_cast<std::uint64_t>(t.iterations_per_epoch)).pod(static_cast<std::uint64_t>(t.finetune_iterations));
    w.pod(static_cast<std::uint64_t>(t.batch_rows)).pod(static_cast<std::uint64_t>(t.batch_cols));
    w.pod(t.learning_rate).pod(t.weight_decay);
    w.pod(static_cast<std::uint8_t>(t.optimizer)).pod(static_cast<std::uint8_t>(t.normalization));
    w.pod(static_cast<std::int64_t>(t.hidden_dim)).pod(static_cast<std::uint8_t>(t.use_self_concat)).pod(t.seed);
    w.pod(static_cast<std::int64_t>(c.distributions.max_order)).pod(c.distributions.alpha);
    w.pod(static_cast<std::uint64_t>(c.distributions.feature_hash_dims));
    w.pod(static_cast<std::int64_t>(c.learner.max_order)).pod(static_cast<std::uint8_t>(c.learner.use_self_concat));
    w.pod(static_cast<std::int64_t>(c.learner.hidden_dim)).pod(c.learner.seed);
    w.matrix(c.learner.weight);
    w.close();
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    binary::Reader r(path);
    if (r.pod<std::uint32_t>() != kCheckpointMagic) throw io_error(path.string() + ": not a checkpoint file");
    if (r.pod<std::uint32_t>() != kCheckpointVersion) throw io_error(path.string() + ": unsupported version");
    Checkpoint c;
    c.dataset_hash = r.pod<std::uint64_t>();
    c.split_index = r.pod<std::uint64_t>();
    TrainConfig& t = c.config;
    t.epochs_pretrain = static_cast<int>(r.pod<std::int64_t>());
    t.epochs_finetune = static_cast<int>(r.pod<std::int64_t>());
    t.iterations_per_epoch = r.pod<std::uint64_t>();
    t.finetune_iterations = r.pod<std::uint64_t>();
    t.batch_rows = r.pod<std::uint64_t>();
    t.batch_cols = r.pod<std::uint64_t>();
    t.learning_rate = r.pod<double>();
    t.weight_decay = r.pod<double>();
    t.optimizer = static_cast<OptimizerKind>(r.pod<std::uint8_t>());
    t.normalization = static_cast<LossNormalization>(r.pod<std::uint8_t>());
    t.hidden_dim = static_cast<int>(r.pod<std::int64_t>());
    t.use_self_concat = r.pod<std::uint8_t>() != 0;
    t.seed = r.pod<std::uint64_t>();
    c.distributions.max_order = static_cast<int>(r.pod<std::int64_t>());
    c.distributions.alpha = r.pod<double>();
    c.distributions.feature_hash_dims = r.pod<std::uint64_t>();
    c.learner.max_order = static_cast<int>(r.pod<std::int64_t>());
    c.learner.use_self_concat = r.pod<std::uint8_t>() != 0;
    c.learner.hidden_dim = static_cast<int>(r.pod<std::int64_t>());
    c.learner.seed = r.pod<std::uint64_t>();
    c.learner.weight = r.matrix();
    if (!c.learner.weight.allFinite()) throw io_error(path.string() + ": checkpoint holds non-finite weights");
    c.learner.touch();
    return c;
}

}  // namespace hetrewire
