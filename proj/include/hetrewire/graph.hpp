#pragma once

#include "common.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <compare>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hetrewire {

/// A directed edge; messages flow from `src` to `dst`.
struct Edge {
    node_id src = 0;
    node_id dst = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct BuildStats {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_dropped = 0;
};

/// Immutable directed graph stored twice in compressed-row form: grouped by
/// destination (in-neighbors) and by source (out-neighbors). Neighbor lists are
/// sorted ascending.
class Graph {
public:
    Graph() : in_offsets_(1, 0), out_offsets_(1, 0) {}

    /// Builds from an arbitrary edge list. Self-loops and duplicate pairs are
    /// dropped and counted in `stats`; ids >= num_nodes throw node_range_error.
    static Graph from_edges(std::size_t num_nodes, std::vector<Edge> edges, BuildStats* stats = nullptr) {
        BuildStats local;
        for (const Edge& e : edges) {
            if (e.src >= num_nodes || e.dst >= num_nodes) {
                throw node_range_error("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                                       ") references a node id >= num_nodes (" + std::to_string(num_nodes) + ")");
            }
        }
        const auto loops = std::remove_if(edges.begin(), edges.end(), [](const Edge& e) { return e.src == e.dst; });
        local.self_loops_dropped = static_cast<std::size_t>(std::distance(loops, edges.end()));
        edges.erase(loops, edges.end());
        std::sort(edges.begin(), edges.end());
        const auto dups = std::unique(edges.begin(), edges.end());
        local.duplicates_dropped = static_cast<std::size_t>(std::distance(dups, edges.end()));
        edges.erase(dups, edges.end());
        if (stats) *stats = local;
        return Graph(num_nodes, edges);
    }

    std::size_t num_nodes() const noexcept { return in_offsets_.size() - 1; }
    std::size_t num_edges() const noexcept { return in_sources_.size(); }

    std::span<const node_id> in_neighbors(node_id v) const {
        return {in_sources_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
    }
    std::span<const node_id> out_neighbors(node_id v) const {
        return {out_targets_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
    }
    std::size_t in_degree(node_id v) const { return in_offsets_[v + 1] - in_offsets_[v]; }
    std::size_t out_degree(node_id v) const { return out_offsets_[v + 1] - out_offsets_[v]; }

    const std::vector<std::size_t>& in_offsets() const noexcept { return in_offsets_; }
    const std::vector<std::size_t>& out_offsets() const noexcept { return out_offsets_; }

    bool has_edge(node_id src, node_id dst) const {
        const auto nbrs = out_neighbors(src);
        return std::binary_search(nbrs.begin(), nbrs.end(), dst);
    }

    /// Canonical edge list sorted by (src, dst).
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(num_edges());
        for (node_id s = 0; s < num_nodes(); ++s) {
            for (node_id d : out_neighbors(s)) out.push_back({s, d});
        }
        return out;
    }

    double mean_in_degree() const {
        return num_nodes() == 0 ? 0.0 : static_cast<double>(num_edges()) / static_cast<double>(num_nodes());
    }

    /// True when every edge has its reverse.
    bool is_symmetric() const {
        for (node_id s = 0; s < num_nodes(); ++s) {
            for (node_id d : out_neighbors(s)) {
                if (!has_edge(d, s)) return false;
            }
        }
        return true;
    }

    std::uint64_t content_hash() const {
        ContentHash h;
        h.update(static_cast<std::uint64_t>(num_nodes()));
        for (node_id s = 0; s < num_nodes(); ++s) {
            for (node_id d : out_neighbors(s)) h.update(s).update(d);
        }
        return h.value();
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.num_nodes() == b.num_nodes() && a.out_offsets_ == b.out_offsets_ && a.out_targets_ == b.out_targets_;
    }

private:
    // `sorted` must be sorted by (src, dst), deduplicated and loop-free.
    Graph(std::size_t n, const std::vector<Edge>& sorted)
        : in_offsets_(n + 1, 0), out_offsets_(n + 1, 0) {
        out_targets_.reserve(sorted.size());
        for (const Edge& e : sorted) {
            ++out_offsets_[e.src + 1];
            ++in_offsets_[e.dst + 1];
            out_targets_.push_back(e.dst);
        }
        std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
        std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
        // Walking edges in src order fills each in-list already sorted by src.
        in_sources_.resize(sorted.size());
        std::vector<std::size_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
        for (const Edge& e : sorted) in_sources_[cursor[e.dst]++] = e.src;
    }

    std::vector<std::size_t> in_offsets_;
    std::vector<node_id> in_sources_;
    std::vector<std::size_t> out_offsets_;
    std::vector<node_id> out_targets_;
};

/// Adds the reverse of every edge.
inline Graph symmetrize(const Graph& g) {
    std::vector<Edge> edges = g.edges();
    const std::size_t m = edges.size();
    edges.reserve(2 * m);
    for (std::size_t i = 0; i < m; ++i) edges.push_back({edges[i].dst, edges[i].src});
    return Graph::from_edges(g.num_nodes(), std::move(edges));
}

struct Split {
    std::string name;
    NodeMask train;
    NodeMask val;
    NodeMask test;

    std::vector<node_id> train_nodes() const { return members(train); }
    std::vector<node_id> val_nodes() const { return members(val); }
    std::vector<node_id> test_nodes() const { return members(test); }

    static std::vector<node_id> members(const NodeMask& mask) {
        std::vector<node_id> out;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) out.push_back(static_cast<node_id>(i));
        }
        return out;
    }
};

/// Graph plus node features, labels and one or more train/val/test splits.
struct Dataset {
    Graph graph;
    Matrix features;
    std::vector<int> labels;
    int num_classes = 0;
    bool undirected = false;
    std::vector<Split> splits;

    std::size_t num_nodes() const noexcept { return graph.num_nodes(); }
    std::size_t num_features() const noexcept { return static_cast<std::size_t>(features.cols()); }

    const Split& split(std::size_t index) const {
        if (index >= splits.size()) {
            throw validation_error("split index " + std::to_string(index) + " out of range (" +
                                   std::to_string(splits.size()) + " splits)");
        }
        return splits[index];
    }

    /// Throws validation_error (or a subclass) when an invariant is violated.
    void validate() const {
        const std::size_t n = num_nodes();
        if (static_cast<std::size_t>(features.rows()) != n) {
            throw ragged_features_error("feature matrix has " + std::to_string(features.rows()) + " rows for " +
                                        std::to_string(n) + " nodes");
        }
        if (labels.size() != n) {
            throw validation_error("expected " + std::to_string(n) + " labels, got " + std::to_string(labels.size()));
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] < 0 || labels[i] >= num_classes) {
                throw label_range_error("label " + std::to_string(labels[i]) + " of node " + std::to_string(i) +
                                        " outside [0, " + std::to_string(num_classes) + ")");
            }
        }
        if (!features.allFinite()) throw validation_error("feature matrix contains non-finite values");
        if (splits.empty()) throw validation_error("dataset has no splits");
        for (const Split& s : splits) {
            if (s.train.size() != n || s.val.size() != n || s.test.size() != n) {
                throw validation_error("split '" + s.name + "' masks do not cover all nodes");
            }
            bool any_train = false;
            for (std::size_t i = 0; i < n; ++i) {
                const int hits = (s.train[i] != 0) + (s.val[i] != 0) + (s.test[i] != 0);
                if (hits > 1) {
                    throw validation_error("split '" + s.name + "': node " + std::to_string(i) +
                                           " belongs to more than one mask");
                }
                any_train = any_train || s.train[i];
            }
            if (!any_train) throw validation_error("split '" + s.name + "' has an empty train mask");
        }
    }

    /// Same dataset with a different edge set.
    Dataset with_graph(Graph g) const {
        if (g.num_nodes() != num_nodes()) {
            throw validation_error("replacement graph has " + std::to_string(g.num_nodes()) + " nodes, dataset has " +
                                   std::to_string(num_nodes()));
        }
        Dataset out = *this;
        out.graph = std::move(g);
        return out;
    }

    /// Hash of features, labels and splits; the edge set is hashed separately.
    std::uint64_t attributes_hash() const {
        ContentHash h;
        h.update(static_cast<std::int64_t>(features.rows())).update(static_cast<std::int64_t>(features.cols()));
        h.update(features.data(), sizeof(double) * static_cast<std::size_t>(features.size()));
        h.update_range(std::span<const int>(labels));
        h.update(num_classes);
        for (const Split& s : splits) {
            h.update(std::string_view(s.name));
            h.update_range(std::span<const char>(s.train)).update_range(std::span<const char>(s.val));
            h.update_range(std::span<const char>(s.test));
        }
        return h.value();
    }

    std::uint64_t content_hash() const {
        ContentHash h;
        h.update(attributes_hash()).update(graph.content_hash());
        return h.value();
    }
};

// ---------------------------------------------------------------------------
// Homophily metrics
// ---------------------------------------------------------------------------

struct HomophilySummary {
    double edge_homophily = 0.0;
    std::vector<double> node_homophily;
    double mean_in_degree = 0.0;
};

/// Share of edges joining same-class endpoints; 0 for an edgeless graph.
inline double edge_homophily(const Graph& g, std::span<const int> labels) {
    if (g.num_edges() == 0) return 0.0;
    std::size_t same = 0;
    for (node_id d = 0; d < g.num_nodes(); ++d) {
        for (node_id s : g.in_neighbors(d)) same += labels[s] == labels[d];
    }
    return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

/// Per-node fraction of same-class in-neighbors; isolated nodes score 0.
inline std::vector<double> node_homophily(const Graph& g, std::span<const int> labels) {
    std::vector<double> out(g.num_nodes(), 0.0);
    for (node_id d = 0; d < g.num_nodes(); ++d) {
        const auto nbrs = g.in_neighbors(d);
        if (nbrs.empty()) continue;
        std::size_t same = 0;
        for (node_id s : nbrs) same += labels[s] == labels[d];
        out[d] = static_cast<double>(same) / static_cast<double>(nbrs.size());
    }
    return out;
}

inline HomophilySummary homophily_summary(const Graph& g, std::span<const int> labels) {
    return {edge_homophily(g, labels), node_homophily(g, labels), g.mean_in_degree()};
}

inline HomophilySummary homophily_summary(const Dataset& d) { return homophily_summary(d.graph, d.labels); }

// ---------------------------------------------------------------------------
// Propagation with the row-normalized in-adjacency D^{-1}A
// ---------------------------------------------------------------------------

/// One application of D^{-1}A: each row becomes the mean of its in-neighbors'
/// rows, zero for nodes without in-neighbors. Summation runs in ascending
/// neighbor order, so the result does not depend on the thread count.
inline Matrix propagate_once(const Graph& g, const Matrix& m) {
    const std::size_t n = g.num_nodes();
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    parallel_for(n, 256, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            const auto nbrs = g.in_neighbors(static_cast<node_id>(v));
            if (nbrs.empty()) continue;
            auto row = out.row(static_cast<Eigen::Index>(v));
            for (node_id s : nbrs) row += m.row(s);
            row /= static_cast<double>(nbrs.size());
        }
    });
    return out;
}

/// (D^{-1}A)^order · m.
inline Matrix propagate(const Graph& g, const Matrix& m, int order) {
    if (order < 1) throw validation_error("propagation order must be >= 1, got " + std::to_string(order));
    if (static_cast<std::size_t>(m.rows()) != g.num_nodes()) {
        throw validation_error("propagate: matrix has " + std::to_string(m.rows()) + " rows for " +
                               std::to_string(g.num_nodes()) + " nodes");
    }
    Matrix cur = propagate_once(g, m);
    for (int k = 1; k < order; ++k) cur = propagate_once(g, cur);
    return cur;
}

}  // namespace hetrewire
