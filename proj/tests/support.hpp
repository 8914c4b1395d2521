#pragma once

// Shared fixtures and dense brute-force oracles. The oracles are written
// independently of the library: dense matrices, explicit loops, and the
// definitions applied literally.

#include <hetrewire/hetrewire.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace testsupport {

using namespace hetrewire;
using Dense = Eigen::MatrixXd;  // column-major on purpose: a different layout from the library

inline Graph random_graph(std::size_t n, double p, std::uint64_t seed, bool symmetric = false) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<Edge> edges;
    for (node_id u = 0; u < n; ++u) {
        for (node_id v = 0; v < n; ++v) {
            if (u == v) continue;
            if (symmetric && v < u) continue;
            if (coin(rng)) {
                edges.push_back({u, v});
                if (symmetric) edges.push_back({v, u});
            }
        }
    }
    return Graph::from_edges(n, edges);
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

/// Random dataset with labels, features and a single split.
inline Dataset random_dataset(std::size_t n, std::size_t d, int classes, double edge_p, std::uint64_t seed,
                              double train_share = 0.5) {
    Dataset ds;
    ds.graph = random_graph(n, edge_p, seed);
    ds.features = random_matrix(n, d, seed + 1);
    ds.num_classes = classes;
    std::mt19937_64 rng(seed + 2);
    std::uniform_int_distribution<int> lab(0, classes - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Split s;
    s.name = "0";
    s.train.assign(n, 0);
    s.val.assign(n, 0);
    s.test.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels.push_back(lab(rng));
        const double r = u(rng);
        if (r < train_share) s.train[i] = 1;
        else if (r < train_share + (1 - train_share) / 2) s.val[i] = 1;
        else s.test[i] = 1;
    }
    s.train[0] = 1;
    s.val[0] = 0;
    s.test[0] = 0;
    ds.splits.push_back(s);
    return ds;
}

/// Dense row-normalized in-adjacency: P[v, s] = 1 / indeg(v) for each edge s -> v.
inline Dense dense_propagation(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    Dense a = Dense::Zero(n, n);
    for (const Edge& e : g.edges()) a(e.dst, e.src) = 1.0;
    for (Eigen::Index v = 0; v < n; ++v) {
        const double deg = a.row(v).sum();
        if (deg > 0) a.row(v) /= deg;
    }
    return a;
}

inline Dense dense_power(const Dense& p, int k) {
    Dense out = Dense::Identity(p.rows(), p.cols());
    for (int i = 0; i < k; ++i) out = out * p;
    return out;
}

inline Dense to_dense(const Matrix& m) { return Dense(m); }

inline double oracle_cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& mean) {
    double dot = 0, nu = 0, nv = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        dot += (u[i] - mean[i]) * (v[i] - mean[i]);
        nu += (u[i] - mean[i]) * (u[i] - mean[i]);
        nv += (v[i] - mean[i]) * (v[i] - mean[i]);
    }
    if (std::sqrt(nu) < 1e-12 || std::sqrt(nv) < 1e-12) return 0.0;
    return dot / std::sqrt(nu * nv);
}

inline Eigen::VectorXd mean_of_rows(const Dense& m, const std::vector<node_id>& ids) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.cols());
    for (node_id i : ids) mean += m.row(i).transpose();
    return mean / static_cast<double>(ids.size());
}

inline std::vector<node_id> all_nodes(std::size_t n) {
    std::vector<node_id> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<node_id>(i);
    return v;
}

/// Product over orders of decentralized cosines of `signals[k]` rows, with the
/// mean of each signal over `center`.
inline Dense oracle_product_block(const std::vector<Dense>& signals, const std::vector<node_id>& rows,
                                  const std::vector<node_id>& cols, const std::vector<node_id>& center) {
    Dense s = Dense::Ones(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (const Dense& z : signals) {
        const Eigen::VectorXd mean = mean_of_rows(z, center);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *=
                    oracle_cosine(z.row(rows[i]).transpose(), z.row(cols[j]).transpose(), mean);
            }
        }
    }
    return s;
}

/// Per-order embeddings [P^k X W | X W] (or just P^k X W), computed densely.
inline std::vector<Dense> oracle_embeddings(const Graph& g, const Dense& x, const Dense& w, int orders,
                                            bool self_concat) {
    const Dense p = dense_propagation(g);
    std::vector<Dense> out;
    for (int k = 1; k <= orders; ++k) {
        Dense z = dense_power(p, k) * x * w;
        if (self_concat) {
            Dense cat(z.rows(), z.cols() * 2);
            cat << z, x * w;
            z = cat;
        }
        out.push_back(z);
    }
    return out;
}

inline std::vector<Dense> oracle_feature_distributions(const Graph& g, const Dense& x, int orders) {
    const Dense p = dense_power(dense_propagation(g), 1);
    std::vector<Dense> out;
    for (int k = 1; k <= orders; ++k) out.push_back(dense_power(p, k) * x);
    return out;
}

inline std::vector<Dense> oracle_label_distributions(const Graph& g, const std::vector<int>& labels, int classes,
                                                     const NodeMask& train, int orders) {
    Dense y = Dense::Zero(static_cast<Eigen::Index>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (train[i]) y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return oracle_feature_distributions(g, y, orders);
}

/// Loss of the learned similarity against a target block, with embeddings
/// decentralized by the mean over `center`; literal squared Frobenius sum,
/// masked and divided by the contributing cells when `per_cell`.
inline double oracle_loss(const Graph& g, const Dense& x, const Dense& w, int orders, bool self_concat,
                          const std::vector<node_id>& rows, const std::vector<node_id>& cols,
                          const std::vector<node_id>& center, const Dense& target, const Dense* mask, bool per_cell) {
    const Dense s = oracle_product_block(oracle_embeddings(g, x, w, orders, self_concat), rows, cols, center);
    double sum = 0.0;
    double cells = 0.0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        for (Eigen::Index j = 0; j < s.cols(); ++j) {
            const double m = mask ? (*mask)(i, j) : 1.0;
            sum += m * (s(i, j) - target(i, j)) * (s(i, j) - target(i, j));
            cells += m;
        }
    }
    return per_cell ? sum / cells : sum;
}

inline std::vector<node_id> brute_topk(const Eigen::VectorXd& sim_to_v, node_id v, std::size_t k) {
    std::vector<std::pair<double, node_id>> all;
    for (Eigen::Index j = 0; j < sim_to_v.size(); ++j) {
        if (static_cast<node_id>(j) != v) all.push_back({-sim_to_v[j], static_cast<node_id>(j)});
    }
    std::sort(all.begin(), all.end());
    std::vector<node_id> out;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
    return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hetrewire_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testsupport
