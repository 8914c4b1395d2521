#pragma once

// Neighbor label/feature distributions, the decentralized cosine, and the
// target similarity blocks that supervise the similarity learner.

#include "binary_io.hpp"
#include "graph.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace hetrewire {

/// Centered vectors with a norm below this are treated as carrying no signal.
inline constexpr double kDegenerateNorm = 1e-12;

/// Cosine of (u - mean) and (v - mean); 0 when either centered vector is
/// degenerate.
inline double decentralized_cosine(std::span<const double> u, std::span<const double> v,
                                   std::span<const double> mean) {
    if (u.size() != v.size() || u.size() != mean.size()) {
        throw validation_error("decentralized_cosine: dimension mismatch (" + std::to_string(u.size()) + ", " +
                               std::to_string(v.size()) + ", " + std::to_string(mean.size()) + ")");
    }
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i] - mean[i];
        const double b = v[i] - mean[i];
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < kDegenerateNorm || nv < kDegenerateNorm) return 0.0;
    return dot / (nu * nv);
}

inline RowVector column_mean(const Matrix& m) {
    if (m.rows() == 0) return RowVector::Zero(m.cols());
    return m.colwise().mean();
}

/// Subtracts `mean` from every row and scales rows to unit length; degenerate
/// rows become zero so that their dot product with anything is 0.
inline Matrix centered_unit_rows(const Matrix& m, const RowVector& mean) {
    Matrix out = m.rowwise() - mean;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm < kDegenerateNorm) {
            out.row(i).setZero();
        } else {
            out.row(i) /= norm;
        }
    }
    return out;
}

inline Matrix centered_unit_rows(const Matrix& m) { return centered_unit_rows(m, column_mean(m)); }

inline Matrix gather_rows(const Matrix& m, std::span<const node_id> ids) {
    Matrix out(static_cast<Eigen::Index>(ids.size()), m.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(ids[i]);
    return out;
}

/// One-hot label matrix; rows outside `keep` (when given) are zero.
inline Matrix one_hot_labels(std::span<const int> labels, int num_classes, const NodeMask* keep = nullptr) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (keep == nullptr || (*keep)[i]) y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return y;
}

/// Signed feature hashing of the columns of `x` into `dims` buckets.
inline Matrix hash_features(const Matrix& x, std::size_t dims, std::uint64_t seed = 0x5eed) {
    if (dims == 0) throw validation_error("hash_features: dims must be positive");
    Matrix out = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(dims));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::uint64_t h = (static_cast<std::uint64_t>(j) + 1) * 0x9e3779b97f4a7c15ULL ^ seed;
        h ^= h >> 31;
        h *= 0xbf58476d1ce4e5b9ULL;
        h ^= h >> 29;
        const auto bucket = static_cast<Eigen::Index>(h % dims);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        out.col(bucket) += sign * x.col(j);
    }
    return out;
}

struct DistributionOptions {
    int max_order = 2;
    /// Mask threshold: node i keeps label guidance iff its train-neighbor
    /// share r_i is strictly greater than alpha.
    double alpha = 0.3;
    /// 0 disables feature hashing; otherwise features are hashed to this width.
    std::size_t feature_hash_dims = 0;
};

struct NeighborDistributions {
    int max_order = 0;
    double alpha = 0.0;
    /// Features the learner consumes (the raw X, or its hashed reduction).
    Matrix base_features;
    std::vector<Matrix> label_dist;  // (D^{-1}A)^k Y_train, N x C
    std::vector<Matrix> feat_dist;   // (D^{-1}A)^k X, N x D
    NodeMask label_mask;
    std::vector<double> train_ratio;

    // All-node centered, unit-normalized rows of each distribution.
    std::vector<Matrix> label_unit;
    std::vector<Matrix> feat_unit;

    std::size_t num_nodes() const noexcept { return label_mask.size(); }

    std::vector<node_id> masked_nodes() const { return Split::members(label_mask); }

    void rebuild_unit_rows() {
        label_unit.clear();
        feat_unit.clear();
        for (const Matrix& m : label_dist) label_unit.push_back(centered_unit_rows(m));
        for (const Matrix& m : feat_dist) feat_unit.push_back(centered_unit_rows(m));
    }
};

inline void check_max_order(int m) {
    if (m != 1 && m != 2) {
        throw validation_error("max neighbor order must be 1 or 2, got " + std::to_string(m));
    }
}

/// Share of in-neighbors that are marked in `train`; 0 for isolated nodes.
inline std::vector<double> train_neighbor_ratio(const Graph& g, const NodeMask& train) {
    std::vector<double> r(g.num_nodes(), 0.0);
    for (node_id v = 0; v < g.num_nodes(); ++v) {
        const auto nbrs = g.in_neighbors(v);
        if (nbrs.empty()) continue;
        std::size_t hits = 0;
        for (node_id s : nbrs) hits += train[s] != 0;
        r[v] = static_cast<double>(hits) / static_cast<double>(nbrs.size());
    }
    return r;
}

inline NodeMask label_mask_from_ratio(std::span<const double> ratio, double alpha) {
    NodeMask mask(ratio.size(), 0);
    for (std::size_t i = 0; i < ratio.size(); ++i) mask[i] = ratio[i] > alpha;
    return mask;
}

inline NeighborDistributions compute_distributions(const Dataset& ds, const Split& split,
                                                   const DistributionOptions& opt = {}) {
    check_max_order(opt.max_order);
    if (!(opt.alpha >= 0.0 && opt.alpha < 1.0)) {
        throw validation_error("alpha must lie in [0, 1), got " + std::to_string(opt.alpha));
    }
    NeighborDistributions nd;
    nd.max_order = opt.max_order;
    nd.alpha = opt.alpha;
    nd.base_features = opt.feature_hash_dims ? hash_features(ds.features, opt.feature_hash_dims) : ds.features;

    Matrix y = one_hot_labels(ds.labels, ds.num_classes, &split.train);
    Matrix x = nd.base_features;
    for (int k = 1; k <= opt.max_order; ++k) {
        y = propagate_once(ds.graph, y);
        x = propagate_once(ds.graph, x);
        nd.label_dist.push_back(y);
        nd.feat_dist.push_back(x);
    }
    nd.train_ratio = train_neighbor_ratio(ds.graph, split.train);
    nd.label_mask = label_mask_from_ratio(nd.train_ratio, opt.alpha);
    nd.rebuild_unit_rows();
    return nd;
}

/// Target similarities for a rows x cols block of node pairs.
struct TargetSimilarityBlock {
    std::vector<node_id> rows;
    std::vector<node_id> cols;
    Matrix s_x;
    Matrix s_y;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y_valid;

    std::size_t valid_cells() const { return static_cast<std::size_t>(y_valid.count()); }
};

/// Product over orders of pairwise cosines between unit rows.
inline Matrix product_of_cosines(const std::vector<Matrix>& unit, std::span<const node_id> rows,
                                 std::span<const node_id> cols) {
    Matrix out = Matrix::Ones(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (const Matrix& u : unit) {
        const Matrix a = gather_rows(u, rows);
        const Matrix b = gather_rows(u, cols);
        out.array() *= (a * b.transpose()).array();
    }
    return out;
}

inline void check_ids(std::span<const node_id> ids, std::size_t n) {
    for (node_id v : ids) {
        if (v >= n) throw node_range_error("node id " + std::to_string(v) + " out of range");
    }
}

inline TargetSimilarityBlock target_block(const NeighborDistributions& nd, std::span<const node_id> rows,
                                          std::span<const node_id> cols) {
    check_ids(rows, nd.num_nodes());
    check_ids(cols, nd.num_nodes());
    TargetSimilarityBlock t;
    t.rows.assign(rows.begin(), rows.end());
    t.cols.assign(cols.begin(), cols.end());
    t.s_x = product_of_cosines(nd.feat_unit, rows, cols);
    t.s_y = product_of_cosines(nd.label_unit, rows, cols);
    t.y_valid.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            t.y_valid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                nd.label_mask[rows[i]] && nd.label_mask[cols[j]];
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Optional on-disk cache
// ---------------------------------------------------------------------------

inline std::uint64_t distribution_cache_key(const Dataset& ds, const Split& split, const DistributionOptions& opt) {
    ContentHash h;
    h.update(ds.graph.content_hash());
    h.update_range(std::span<const int>(ds.labels));
    h.update_range(std::span<const char>(split.train));
    h.update(opt.max_order).update(opt.alpha).update(static_cast<std::uint64_t>(opt.feature_hash_dims));
    h.update(ds.features.data(), sizeof(double) * static_cast<std::size_t>(ds.features.size()));
    return h.value();
}

inline constexpr std::uint32_t kDistributionCacheMagic = 0x48524443;  // "HRDC"

inline void save_distribution_cache(const std::filesystem::path& path, const NeighborDistributions& nd,
                                    std::uint64_t key) {
    binary::Writer w(path);
    w.pod(kDistributionCacheMagic).pod(key).pod(nd.max_order).pod(nd.alpha);
    w.matrix(nd.base_features);
    for (int k = 0; k < nd.max_order; ++k) w.matrix(nd.label_dist[static_cast<std::size_t>(k)]);
    for (int k = 0; k < nd.max_order; ++k) w.matrix(nd.feat_dist[static_cast<std::size_t>(k)]);
    w.vector(nd.label_mask).vector(nd.train_ratio);
    w.close();
}

/// Returns nullopt when the file is absent or was written for different inputs.
inline std::optional<NeighborDistributions> load_distribution_cache(const std::filesystem::path& path,
                                                                    std::uint64_t key) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    binary::Reader r(path);
    if (r.pod<std::uint32_t>() != kDistributionCacheMagic || r.pod<std::uint64_t>() != key) return std::nullopt;
    NeighborDistributions nd;
    nd.max_order = r.pod<int>();
    nd.alpha = r.pod<double>();
    check_max_order(nd.max_order);
    nd.base_features = r.matrix();
    for (int k = 0; k < nd.max_order; ++k) nd.label_dist.push_back(r.matrix());
    for (int k = 0; k < nd.max_order; ++k) nd.feat_dist.push_back(r.matrix());
    nd.label_mask = r.vector<char>();
    nd.train_ratio = r.vector<double>();
    nd.rebuild_unit_rows();
    return nd;
}

}  // namespace hetrewire
