#pragma once

// Controlled synthetic graphs and the discrete mutual-information estimator
// between pairwise similarity and edge polarity.

#include "distributions.hpp"
#include "io.hpp"
#include "learner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace hetrewire {

namespace detail {
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

struct SyntheticSpec {
    std::size_t degree = 5;  // k
    double homophily = 0.5;  // p
    std::uint64_t seed = 0;

    std::size_t same_class_count() const {
        return static_cast<std::size_t>(std::floor(homophily * static_cast<double>(degree) + 1e-9));
    }
    std::size_t other_class_count() const { return degree - same_class_count(); }
};

/// Directed graph in which every node has exactly k in-neighbors, floor(p*k)
/// of them from its own class and the rest from other classes, all drawn
/// uniformly without replacement.
inline Graph build_synthetic(std::span<const int> labels, int num_classes, const SyntheticSpec& spec) {
    if (spec.degree < 1) throw validation_error("synthetic degree must be >= 1");
    if (!(spec.homophily >= 0.0 && spec.homophily <= 1.0)) {
        throw validation_error("synthetic homophily must lie in [0, 1]");
    }
    const std::size_t n = labels.size();
    // Nodes grouped by class; class c occupies [start[c], start[c + 1]).
    std::vector<std::size_t> start(static_cast<std::size_t>(num_classes) + 1, 0);
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw label_range_error("label " + std::to_string(y) + " out of range");
        ++start[static_cast<std::size_t>(y) + 1];
    }
    for (int c = 0; c < num_classes; ++c) start[static_cast<std::size_t>(c) + 1] += start[static_cast<std::size_t>(c)];
    std::vector<node_id> grouped(n);
    std::vector<std::size_t> position(n);
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t v = 0; v < n; ++v) {
            const auto c = static_cast<std::size_t>(labels[v]);
            position[v] = fill[c];
            grouped[fill[c]++] = static_cast<node_id>(v);
        }
    }

    const std::size_t same = spec.same_class_count();
    const std::size_t other = spec.other_class_count();
    for (int c = 0; c < num_classes; ++c) {
        const std::size_t size = start[static_cast<std::size_t>(c) + 1] - start[static_cast<std::size_t>(c)];
        if (size == 0) continue;
        if (size - 1 < same) {
            throw validation_error("class " + std::to_string(c) + " has " + std::to_string(size) +
                                   " members, too few for " + std::to_string(same) + " same-class neighbors");
        }
        if (n - size < other) {
            throw validation_error("too few nodes outside class " + std::to_string(c) + " for " +
                                   std::to_string(other) + " different-class neighbors");
        }
    }

    std::vector<std::vector<Edge>> per_node(n);
    parallel_for(n, 256, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            std::mt19937_64 rng(detail::mix_seed(spec.seed, v));
            const auto c = static_cast<std::size_t>(labels[v]);
            const std::size_t lo = start[c];
            const std::size_t size = start[c + 1] - lo;
            const std::size_t own = position[v] - lo;
            // Same class, excluding v itself.
            for (node_id t : sample_distinct(size - 1, same, rng)) {
                const std::size_t idx = lo + (t >= own ? t + 1 : t);
                per_node[v].push_back({grouped[idx], static_cast<node_id>(v)});
            }
            // Everything outside the class block.
            for (node_id t : sample_distinct(n - size, other, rng)) {
                const std::size_t idx = t < lo ? t : t + size;
                per_node[v].push_back({grouped[idx], static_cast<node_id>(v)});
            }
        }
    });
    std::vector<Edge> edges;
    edges.reserve(n * spec.degree);
    for (auto& e : per_node) edges.insert(edges.end(), e.begin(), e.end());
    return Graph::from_edges(n, std::move(edges));
}

inline Graph build_synthetic(const Dataset& ds, const SyntheticSpec& spec) {
    return build_synthetic(ds.labels, ds.num_classes, spec);
}

// ---------------------------------------------------------------------------
// Mutual information
// ---------------------------------------------------------------------------

struct MIResult {
    std::string signal;
    double mi_nats = 0.0;
    std::size_t bin_count = 0;
    std::size_t samples = 0;
    std::string sample_description;
};

/// Plug-in MI (nats) between equal-width-binned similarities and a binary
/// polarity.
inline MIResult mutual_information(std::span<const double> sims, std::span<const char> polarities,
                                   std::size_t bins = 16) {
    if (sims.size() != polarities.size()) throw validation_error("mutual_information: length mismatch");
    if (bins < 1) throw validation_error("mutual_information: bins must be >= 1");
    if (sims.size() < bins) {
        throw validation_error("mutual_information: need at least as many samples as bins");
    }
    MIResult r;
    r.samples = sims.size();
    double lo = sims[0];
    double hi = sims[0];
    for (double s : sims) {
        if (!std::isfinite(s)) throw validation_error("mutual_information: non-finite similarity");
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (hi == lo) {
        r.bin_count = 1;
        return r;
    }
    r.bin_count = bins;
    std::vector<double> joint(bins * 2, 0.0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i < sims.size(); ++i) {
        auto b = static_cast<std::size_t>((sims[i] - lo) / width);
        b = std::min(b, bins - 1);
        joint[b * 2 + (polarities[i] ? 1 : 0)] += 1.0;
    }
    const double total = static_cast<double>(sims.size());
    double py[2] = {0.0, 0.0};
    for (std::size_t b = 0; b < bins; ++b) {
        py[0] += joint[b * 2];
        py[1] += joint[b * 2 + 1];
    }
    double mi = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double px = joint[b * 2] + joint[b * 2 + 1];
        for (int y = 0; y < 2; ++y) {
            const double pxy = joint[b * 2 + static_cast<std::size_t>(y)];
            if (pxy > 0.0) mi += pxy / total * std::log(pxy * total / (px * py[y]));
        }
    }
    r.mi_nats = std::max(0.0, mi);
    return r;
}

struct PairSample {
    std::vector<node_id> a;
    std::vector<node_id> b;
    std::size_t edges = 0;
};

/// Every edge (src, dst) plus the same number of distinct uniform non-edge
/// pairs.
inline PairSample edge_and_contrast_pairs(const Graph& g, std::uint64_t seed) {
    PairSample s;
    for (const Edge& e : g.edges()) {
        s.a.push_back(e.src);
        s.b.push_back(e.dst);
    }
    s.edges = s.a.size();
    const std::size_t n = g.num_nodes();
    const std::size_t capacity = n * (n - 1) - g.num_edges();
    const std::size_t want = std::min(s.edges, capacity);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::unordered_set<std::uint64_t> seen;
    while (seen.size() < want) {
        const auto u = static_cast<node_id>(pick(rng));
        const auto v = static_cast<node_id>(pick(rng));
        if (u == v || g.has_edge(u, v)) continue;
        if (seen.insert((static_cast<std::uint64_t>(u) << 32) | v).second) {
            s.a.push_back(u);
            s.b.push_back(v);
        }
    }
    return s;
}

/// MI between each similarity signal and the same-class indicator over edges
/// and contrast pairs. Signals use full labels: this is an analysis tool.
inline std::vector<MIResult> mi_study(const Dataset& ds, int max_order = 2, std::size_t bins = 16,
                                      std::uint64_t seed = 0) {
    check_max_order(max_order);
    const PairSample pairs = edge_and_contrast_pairs(ds.graph, seed);
    std::vector<char> polarity(pairs.a.size());
    for (std::size_t i = 0; i < pairs.a.size(); ++i) polarity[i] = ds.labels[pairs.a[i]] == ds.labels[pairs.b[i]];
    const std::string description = std::to_string(pairs.edges) + " edges + " +
                                    std::to_string(pairs.a.size() - pairs.edges) + " uniform non-edges, " +
                                    std::to_string(bins) + " equal-width bins";

    auto measure = [&](const std::string& name, const Matrix& signal) {
        const Matrix unit = centered_unit_rows(signal);
        std::vector<double> sims(pairs.a.size());
        for (std::size_t i = 0; i < sims.size(); ++i) sims[i] = unit.row(pairs.a[i]).dot(unit.row(pairs.b[i]));
        MIResult r = mutual_information(sims, polarity, bins);
        r.signal = name;
        r.sample_description = description;
        return r;
    };

    std::vector<MIResult> out;
    out.push_back(measure("raw-feature", ds.features));
    Matrix x = ds.features;
    for (int k = 1; k <= max_order; ++k) {
        x = propagate_once(ds.graph, x);
        out.push_back(measure("feat-dist-" + std::to_string(k), x));
    }
    Matrix y = one_hot_labels(ds.labels, ds.num_classes);
    for (int k = 1; k <= max_order; ++k) {
        y = propagate_once(ds.graph, y);
        out.push_back(measure("label-dist-" + std::to_string(k), y));
    }
    return out;
}

inline json to_json(const MIResult& r) {
    return {{"signal", r.signal},
            {"mi_nats", r.mi_nats},
            {"bin_count", r.bin_count},
            {"samples", r.samples},
            {"sample", r.sample_description}};
}

// ---------------------------------------------------------------------------
// Planted-partition datasets
// ---------------------------------------------------------------------------

struct PlantedSpec {
    std::size_t num_nodes = 1000;
    int num_classes = 5;
    std::size_t num_features = 200;
    /// Expected undirected degree.
    double mean_degree = 8.0;
    /// Probability that an edge joins two nodes of the same class.
    double edge_homophily = 0.2;
    /// Words drawn from the node's class topic; the rest are uniform noise.
    std::size_t topic_words = 6;
    std::size_t noise_words = 14;
    /// Heterophilic edges pick the other class by this fixed offset pattern
    /// (class c links mostly to c+1 mod C), giving structured neighbor
    /// label distributions.
    double structured_share = 0.8;
    std::size_t num_splits = 1;
    double train_share = 0.6;
    double val_share = 0.2;
    std::uint64_t seed = 0;
};

/// Random graph with planted class structure, bag-of-words features, and
/// random train/val/test splits. Symmetric.
inline Dataset planted_dataset(const PlantedSpec& spec) {
    if (spec.num_classes < 2) throw validation_error("planted dataset needs at least 2 classes");
    const std::size_t n = spec.num_nodes;
    const auto c_count = static_cast<std::size_t>(spec.num_classes);
    std::mt19937_64 rng(spec.seed);
    Dataset ds;
    ds.num_classes = spec.num_classes;
    ds.undirected = true;
    ds.labels.resize(n);
    std::vector<std::vector<node_id>> members(c_count);
    for (std::size_t v = 0; v < n; ++v) {
        ds.labels[v] = static_cast<int>(v % c_count);
        members[v % c_count].push_back(static_cast<node_id>(v));
    }

    const auto target_edges = static_cast<std::size_t>(spec.mean_degree * static_cast<double>(n) / 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    std::vector<Edge> edges;
    edges.reserve(2 * target_edges);
    for (std::size_t e = 0; e < target_edges; ++e) {
        const auto u = static_cast<node_id>(any(rng));
        const auto cu = static_cast<std::size_t>(ds.labels[u]);
        std::size_t cv = cu;
        if (unit(rng) >= spec.edge_homophily) {
            if (unit(rng) < spec.structured_share) {
                cv = (cu + 1) % c_count;
            } else {
                std::uniform_int_distribution<std::size_t> shift(1, c_count - 1);
                cv = (cu + shift(rng)) % c_count;
            }
        }
        const auto& pool = members[cv];
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const node_id v = pool[pick(rng)];
        if (u == v) continue;
        edges.push_back({u, v});
        edges.push_back({v, u});
    }
    ds.graph = Graph::from_edges(n, std::move(edges));

    const std::size_t d = spec.num_features;
    const std::size_t topic = std::max<std::size_t>(1, d / c_count);
    ds.features = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::uniform_int_distribution<std::size_t> word(0, d - 1);
    std::uniform_int_distribution<std::size_t> topic_word(0, topic - 1);
    for (std::size_t v = 0; v < n; ++v) {
        const auto c = static_cast<std::size_t>(ds.labels[v]);
        for (std::size_t w = 0; w < spec.topic_words; ++w) {
            ds.features(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>((c * topic + topic_word(rng)) % d)) = 1.0;
        }
        for (std::size_t w = 0; w < spec.noise_words; ++w) {
            ds.features(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(word(rng))) = 1.0;
        }
    }

    for (std::size_t s = 0; s < spec.num_splits; ++s) {
        std::vector<node_id> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<node_id>(i);
        std::shuffle(perm.begin(), perm.end(), rng);
        Split split;
        split.name = std::to_string(s);
        split.train.assign(n, 0);
        split.val.assign(n, 0);
        split.test.assign(n, 0);
        const auto n_train = static_cast<std::size_t>(spec.train_share * static_cast<double>(n));
        const auto n_val = static_cast<std::size_t>(spec.val_share * static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            NodeMask& m = i < n_train ? split.train : (i < n_train + n_val ? split.val : split.test);
            m[perm[i]] = 1;
        }
        ds.splits.push_back(std::move(split));
    }
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// Grid emission
// ---------------------------------------------------------------------------

/// Writes one dataset directory per (k, p) cell, reusing the base features,
/// labels and splits, plus manifest.json describing the grid.
inline json write_synthetic_grid(const Dataset& base, std::span<const std::size_t> ks, std::span<const double> ps,
                                 std::uint64_t seed, const fs::path& out_dir) {
    json manifest;
    manifest["construction"] =
        "every node has exactly k distinct in-neighbors: floor(p*k) same-class, the rest different-class, "
        "sampled uniformly without replacement";
    manifest["seed"] = seed;
    manifest["base_dataset_hash"] = ContentHash::to_hex(base.content_hash());
    manifest["cells"] = json::array();
    for (std::size_t k : ks) {
        for (double p : ps) {
            SyntheticSpec spec{k, p, detail::mix_seed(seed, k * 1000 + static_cast<std::size_t>(std::lround(p * 100)))};
            Dataset cell = base.with_graph(build_synthetic(base, spec));
            cell.undirected = false;
            char name[64];
            std::snprintf(name, sizeof(name), "k%zu_p%.2f", k, p);
            save_dataset(out_dir / name, cell);
            manifest["cells"].push_back({{"k", k},
                                         {"p", p},
                                         {"dir", name},
                                         {"seed", spec.seed},
                                         {"edge_homophily", edge_homophily(cell.graph, cell.labels)}});
        }
    }
    write_json(out_dir / "manifest.json", manifest);
    return manifest;
}

}  // namespace hetrewire
