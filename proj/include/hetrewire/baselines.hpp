#pragma once

// Random rewiring baselines.

#include "graph.hpp"

#include <cmath>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace hetrewire {

enum class BaselineMode { rand_add, rand_drop, train_label_add };

inline BaselineMode parse_baseline_mode(const std::string& s) {
    if (s == "rand-add") return BaselineMode::rand_add;
    if (s == "rand-drop") return BaselineMode::rand_drop;
    if (s == "train-label-add") return BaselineMode::train_label_add;
    throw validation_error("unknown baseline mode '" + s + "' (expected rand-add, rand-drop or train-label-add)");
}

inline const char* to_string(BaselineMode m) {
    switch (m) {
        case BaselineMode::rand_add: return "rand-add";
        case BaselineMode::rand_drop: return "rand-drop";
        case BaselineMode::train_label_add: return "train-label-add";
    }
    return "?";
}

struct BaselineParams {
    BaselineMode mode = BaselineMode::rand_add;
    double probability = 0.5;
    /// Treat edges as unordered pairs: drops remove both directions and
    /// additions insert both.
    bool symmetric = true;
    std::uint64_t seed = 0;
};

/// rand-add: uniform absent pairs are added until round(p * |E|) edges are new.
/// rand-drop: every edge (pair, when symmetric) is removed with probability p.
/// train-label-add: every absent same-class pair of train nodes is added with
/// probability p.
inline Graph baseline_rewire(const Graph& g, const BaselineParams& params, std::span<const int> labels = {},
                             const NodeMask* train = nullptr) {
    if (!(params.probability >= 0.0 && params.probability <= 1.0)) {
        throw validation_error("baseline probability must lie in [0, 1], got " + std::to_string(params.probability));
    }
    const std::size_t n = g.num_nodes();
    std::mt19937_64 rng(params.seed);
    std::bernoulli_distribution coin(params.probability);
    std::vector<Edge> edges = g.edges();

    switch (params.mode) {
        case BaselineMode::rand_drop: {
            std::vector<Edge> kept;
            if (params.symmetric) {
                // Decide once per unordered pair, on its lower-id orientation.
                std::unordered_set<std::uint64_t> dropped;
                for (const Edge& e : edges) {
                    const node_id a = std::min(e.src, e.dst);
                    const node_id b = std::max(e.src, e.dst);
                    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
                    if (e.src == a || !g.has_edge(a, b)) {
                        if (coin(rng)) dropped.insert(key);
                    }
                }
                for (const Edge& e : edges) {
                    const node_id a = std::min(e.src, e.dst);
                    const node_id b = std::max(e.src, e.dst);
                    if (!dropped.count((static_cast<std::uint64_t>(a) << 32) | b)) kept.push_back(e);
                }
            } else {
                for (const Edge& e : edges) {
                    if (!coin(rng)) kept.push_back(e);
                }
            }
            return Graph::from_edges(n, std::move(kept));
        }
        case BaselineMode::rand_add: {
            const auto target = static_cast<std::size_t>(std::llround(params.probability * static_cast<double>(g.num_edges())));
            const std::size_t capacity = n < 2 ? 0 : n * (n - 1) - g.num_edges();
            if (target > capacity) throw validation_error("rand-add: not enough absent pairs");
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            std::unordered_set<std::uint64_t> added;
            std::size_t count = 0;
            while (count < target) {
                const auto u = static_cast<node_id>(pick(rng));
                const auto v = static_cast<node_id>(pick(rng));
                if (u == v || g.has_edge(u, v)) continue;
                if (!added.insert((static_cast<std::uint64_t>(u) << 32) | v).second) continue;
                edges.push_back({u, v});
                ++count;
                if (params.symmetric && !g.has_edge(v, u) &&
                    added.insert((static_cast<std::uint64_t>(v) << 32) | u).second) {
                    edges.push_back({v, u});
                    ++count;
                }
            }
            return Graph::from_edges(n, std::move(edges));
        }
        case BaselineMode::train_label_add: {
            if (labels.size() != n || train == nullptr || train->size() != n) {
                throw validation_error("train-label-add needs labels and a train mask for every node");
            }
            const std::vector<node_id> nodes = Split::members(*train);
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                for (std::size_t j = params.symmetric ? i + 1 : 0; j < nodes.size(); ++j) {
                    const node_id u = nodes[i];
                    const node_id v = nodes[j];
                    if (u == v || labels[u] != labels[v]) continue;
                    if (params.symmetric) {
                        if (g.has_edge(u, v) && g.has_edge(v, u)) continue;
                        if (coin(rng)) {
                            edges.push_back({u, v});
                            edges.push_back({v, u});
                        }
                    } else {
                        if (g.has_edge(u, v)) continue;
                        if (coin(rng)) edges.push_back({u, v});
                    }
                }
            }
            return Graph::from_edges(n, std::move(edges));
        }
    }
    return g;
}

}  // namespace hetrewire
