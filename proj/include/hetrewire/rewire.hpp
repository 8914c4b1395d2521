#pragma once

// Rewiring: every node gains in-edges from its top-K most similar nodes whose
// similarity reaches the growing threshold, and original edges whose
// similarity falls below the pruning threshold are removed.

#include "ball_tree.hpp"
#include "learner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace hetrewire {

struct ScoredNode {
    double score = 0.0;
    node_id id = 0;

    /// Ranking order: higher score first, then smaller id.
    friend bool ranks_before(const ScoredNode& a, const ScoredNode& b) {
        return a.score > b.score || (a.score == b.score && a.id < b.id);
    }
};

/// Top-K of `v` under an arbitrary similarity, by exhaustive scan.
template <typename Sim>
std::vector<node_id> topk_bruteforce(std::size_t num_nodes, node_id v, std::size_t k, Sim&& sim) {
    std::vector<ScoredNode> all;
    all.reserve(num_nodes);
    for (std::size_t j = 0; j < num_nodes; ++j) {
        if (j != v) all.push_back({sim(static_cast<node_id>(j), v), static_cast<node_id>(j)});
    }
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                      [](const ScoredNode& a, const ScoredNode& b) { return ranks_before(a, b); });
    std::vector<node_id> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].id);
    return out;
}

inline std::vector<node_id> topk_candidates_bruteforce(const EmbeddingSet& e, node_id v, std::size_t k) {
    return topk_bruteforce(e.num_nodes(), v, k, [&](node_id a, node_id b) { return pair_similarity(e, a, b); });
}

/// Exact top-K index over learned embeddings.
///
/// Each node is the concatenation of its per-order unit embeddings scaled by
/// 1/sqrt(M), plus one padding coordinate that brings every point to unit
/// length, so Euclidean nearest neighbors are the largest inner products. The
/// inner product equals the mean of the per-order cosines. For M = 1 that is
/// the similarity itself; for M = 2 the product c1*c2 is bounded by
/// ((c1 + c2) / 2)^2, so querying both +q and -q yields a shortlist whose
/// unseen remainder is bounded. The shortlist (4K to start) is re-ranked by the
/// true similarity and doubled until its K-th score beats that bound.
class SimilarityIndex {
public:
    explicit SimilarityIndex(const EmbeddingSet& e, std::size_t leaf_size = 32) : emb_(&e) {
        const std::size_t n = e.num_nodes();
        const int m = e.max_order();
        if (m < 1 || m > 2) throw validation_error("SimilarityIndex supports max order 1 or 2");
        const Eigen::Index width = e.unit.front().cols();
        const double scale = 1.0 / std::sqrt(static_cast<double>(m));
        points_.resize(static_cast<Eigen::Index>(n), width * m + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            for (int k = 0; k < m; ++k) {
                points_.row(r).segment(width * k, width) = scale * e.unit[static_cast<std::size_t>(k)].row(r);
            }
            const double norm2 = points_.row(r).head(width * m).squaredNorm();
            points_(r, width * m) = std::sqrt(std::max(0.0, 1.0 - norm2));
        }
        tree_ = BallTree(points_, leaf_size);
    }

    std::vector<node_id> topk(node_id v, std::size_t k) const {
        const std::size_t n = emb_->num_nodes();
        if (v >= n) throw node_range_error("node id " + std::to_string(v) + " out of range");
        k = std::min(k, n - 1);
        if (k == 0) return {};
        const Eigen::Index width = points_.cols() - 1;
        RowVector q = points_.row(v);
        q[width] = 0.0;
        RowVector neg = -q;
        const bool two_sided = emb_->max_order() == 2;

        std::size_t shortlist = std::min(n, std::max<std::size_t>(4 * k, k + 1));
        for (;;) {
            const auto plus = tree_.knn({q.data(), static_cast<std::size_t>(q.size())}, shortlist);
            std::vector<BallTree::Neighbor> minus;
            if (two_sided) minus = tree_.knn({neg.data(), static_cast<std::size_t>(neg.size())}, shortlist);

            std::vector<node_id> ids;
            for (const auto& nb : plus) ids.push_back(nb.id);
            for (const auto& nb : minus) ids.push_back(nb.id);
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

            std::vector<ScoredNode> scored;
            for (node_id j : ids) {
                if (j != v) scored.push_back({pair_similarity(*emb_, j, v), j});
            }
            std::sort(scored.begin(), scored.end(),
                      [](const ScoredNode& a, const ScoredNode& b) { return ranks_before(a, b); });

            const bool complete = shortlist >= n;
            bool settled = complete;
            if (!complete && scored.size() >= k) {
                const double hi = inner(q, plus.back().id);
                double bound = hi;
                if (two_sided) {
                    const double lo = inner(q, minus.back().id);
                    bound = std::max(hi * hi, lo * lo);
                }
                // A strict margin leaves room for rounding and for ties with
                // unseen smaller ids.
                settled = scored[k - 1].score > bound + 1e-9;
            }
            if (settled) {
                std::vector<node_id> out;
                for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].id);
                return out;
            }
            shortlist = std::min(n, shortlist * 2);
        }
    }

private:
    double inner(const RowVector& q, node_id j) const {
        const Eigen::Index width = points_.cols() - 1;
        return q.head(width).dot(points_.row(j).head(width));
    }

    const EmbeddingSet* emb_;
    Matrix points_;
    BallTree tree_;
};

inline SimilarityIndex build_index(const EmbeddingSet& e) { return SimilarityIndex(e); }

struct RewireParams {
    std::size_t max_added_per_node = 8;  // K
    double add_threshold = 0.6;          // epsilon: candidates need S >= epsilon
    double prune_threshold = -1.0;       // gamma: original edges with S < gamma go; -1 disables
    /// Also add the reverse of every added edge.
    bool symmetric_add = false;
    /// Discard every original edge and keep only the added ones.
    bool drop_original = false;

    void validate() const {
        if (std::isnan(add_threshold) || std::isnan(prune_threshold)) {
            throw validation_error("rewire thresholds must not be NaN");
        }
    }
};

struct RewireReport {
    std::size_t original_edges = 0;
    std::size_t rewired_edges = 0;
    std::size_t edges_added = 0;
    std::size_t edges_pruned = 0;
    std::optional<double> hr_before;
    std::optional<double> hr_after;
    /// Per node v: sources of the in-edges added to v.
    std::vector<std::vector<node_id>> added_per_node;
    RewireParams params;
    std::string checkpoint_hash;
};

struct RewireResult {
    Graph graph;
    RewireReport report;
};

/// Core rewiring over arbitrary candidate and similarity providers.
///
/// Additions are decided against the original edge set and pruning only looks
/// at original edges, so the outcome does not depend on processing order.
template <typename TopK, typename Sim>
RewireResult rewire_with(const Graph& g, TopK&& topk, Sim&& sim, const RewireParams& params,
                         std::span<const int> labels = {}) {
    params.validate();
    const std::size_t n = g.num_nodes();
    std::vector<std::vector<node_id>> accepted(n);
    if (params.max_added_per_node > 0) {
        parallel_for(n, 64, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const auto v = static_cast<node_id>(i);
                for (node_id j : topk(v, params.max_added_per_node)) {
                    if (sim(j, v) >= params.add_threshold) accepted[i].push_back(j);
                }
            }
        });
    }

    std::vector<Edge> added;
    for (node_id v = 0; v < n; ++v) {
        for (node_id j : accepted[v]) {
            if (!g.has_edge(j, v)) added.push_back({j, v});
            if (params.symmetric_add && !g.has_edge(v, j)) added.push_back({v, j});
        }
    }
    std::sort(added.begin(), added.end());
    added.erase(std::unique(added.begin(), added.end()), added.end());

    std::vector<Edge> kept;
    std::size_t pruned = 0;
    for (const Edge& e : g.edges()) {
        if (params.drop_original || sim(e.src, e.dst) < params.prune_threshold) {
            ++pruned;
        } else {
            kept.push_back(e);
        }
    }

    RewireResult out;
    out.report.params = params;
    out.report.original_edges = g.num_edges();
    out.report.edges_added = added.size();
    out.report.edges_pruned = pruned;
    out.report.added_per_node.assign(n, {});
    for (const Edge& e : added) out.report.added_per_node[e.dst].push_back(e.src);

    kept.insert(kept.end(), added.begin(), added.end());
    out.graph = Graph::from_edges(n, std::move(kept));
    out.report.rewired_edges = out.graph.num_edges();
    if (!labels.empty()) {
        out.report.hr_before = edge_homophily(g, labels);
        out.report.hr_after = edge_homophily(out.graph, labels);
    }
    return out;
}

/// Rewires using learned embeddings; the index is used for candidates unless
/// `exhaustive` is set.
inline RewireResult rewire(const Graph& g, const EmbeddingSet& e, const RewireParams& params,
                           std::span<const int> labels = {}, bool exhaustive = false) {
    if (e.num_nodes() != g.num_nodes()) {
        throw validation_error("embeddings cover " + std::to_string(e.num_nodes()) + " nodes, graph has " +
                               std::to_string(g.num_nodes()));
    }
    auto sim = [&](node_id a, node_id b) { return pair_similarity(e, a, b); };
    if (exhaustive || params.max_added_per_node == 0) {
        return rewire_with(g, [&](node_id v, std::size_t k) { return topk_candidates_bruteforce(e, v, k); }, sim,
                           params, labels);
    }
    const SimilarityIndex index(e);
    return rewire_with(g, [&](node_id v, std::size_t k) { return index.topk(v, k); }, sim, params, labels);
}

inline RewireResult rewire(const Graph& g, const SimilarityLearner& l, const NeighborDistributions& nd,
                           const RewireParams& params, std::span<const int> labels = {}) {
    return rewire(g, compute_embeddings(l, nd), params, labels);
}

}  // namespace hetrewire
