#pragma once

// Dataset directory layout:
//   edges.tsv     one "src<TAB>dst" pair per line
//   features.csv  row i = comma-separated floats of node i
//   labels.csv    row i = class id of node i
//   splits.json   {"train": [...], "val": [...], "test": [...]}
//                 or {"splits": {"name": {"train": ..., "val": ..., "test": ...}, ...}}
//   meta.json     {"num_nodes": N, "num_classes": C, "undirected": bool}

#include "graph.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hetrewire {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct DatasetFormat {
    /// Overrides meta.json's `undirected` flag when set.
    std::optional<bool> undirected;
};

struct LoadReport {
    BuildStats edges;
    std::size_t raw_edge_lines = 0;
    bool symmetrized = false;
};

namespace detail {

inline std::ifstream open_input(const fs::path& path) {
    if (!fs::exists(path)) throw missing_file_error("missing file: " + path.string());
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    return in;
}

inline std::ofstream open_output(const fs::path& path, bool append = false) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    return out;
}

inline json read_json(const fs::path& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw validation_error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view token, const fs::path& file, std::size_t line) {
    token = trim(token);
    T value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw validation_error(file.string() + ":" + std::to_string(line) + ": cannot parse '" + std::string(token) +
                               "'");
    }
    return value;
}

inline std::vector<node_id> node_list(const json& j, const char* key, std::size_t n, const std::string& where) {
    if (!j.contains(key)) throw validation_error(where + ": missing '" + key + "' array");
    std::vector<node_id> out;
    for (const auto& v : j.at(key)) {
        const auto id = v.get<long long>();
        if (id < 0 || static_cast<std::size_t>(id) >= n) {
            throw node_range_error(where + ": node id " + std::to_string(id) + " out of range");
        }
        out.push_back(static_cast<node_id>(id));
    }
    return out;
}

inline Split split_from_json(const json& j, std::string name, std::size_t n) {
    Split s{std::move(name), NodeMask(n, 0), NodeMask(n, 0), NodeMask(n, 0)};
    for (node_id v : node_list(j, "train", n, "split " + s.name)) s.train[v] = 1;
    for (node_id v : node_list(j, "val", n, "split " + s.name)) s.val[v] = 1;
    for (node_id v : node_list(j, "test", n, "split " + s.name)) s.test[v] = 1;
    return s;
}

inline json split_to_json(const Split& s) {
    return {{"train", s.train_nodes()}, {"val", s.val_nodes()}, {"test", s.test_nodes()}};
}

}  // namespace detail

inline std::vector<Edge> read_edge_list(const fs::path& path) {
    auto in = detail::open_input(path);
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto sep = view.find_first_of("\t ");
        if (sep == std::string_view::npos) {
            throw validation_error(path.string() + ":" + std::to_string(lineno) + ": expected 'src<TAB>dst'");
        }
        const auto src = detail::parse_number<long long>(view.substr(0, sep), path, lineno);
        const auto dst = detail::parse_number<long long>(view.substr(sep + 1), path, lineno);
        if (src < 0 || dst < 0 || src > std::numeric_limits<node_id>::max() ||
            dst > std::numeric_limits<node_id>::max()) {
            throw node_range_error(path.string() + ":" + std::to_string(lineno) + ": node id out of range");
        }
        edges.push_back({static_cast<node_id>(src), static_cast<node_id>(dst)});
    }
    return edges;
}

/// Writes the canonical (src, dst)-sorted edge list.
inline void save_edges(const fs::path& path, const Graph& g) {
    auto out = detail::open_output(path);
    for (const Edge& e : g.edges()) out << e.src << '\t' << e.dst << '\n';
    if (!out) throw io_error("failed writing " + path.string());
}

/// Reads an edge file as a graph over `num_nodes` nodes.
inline Graph load_graph(const fs::path& path, std::size_t num_nodes, bool undirected = false,
                        BuildStats* stats = nullptr) {
    auto edges = read_edge_list(path);
    if (undirected) {
        const std::size_t m = edges.size();
        for (std::size_t i = 0; i < m; ++i) edges.push_back({edges[i].dst, edges[i].src});
    }
    return Graph::from_edges(num_nodes, std::move(edges), stats);
}

inline Dataset load_dataset(const fs::path& dir, const DatasetFormat& format = {}, LoadReport* report = nullptr) {
    const json meta = detail::read_json(dir / "meta.json");
    Dataset ds;
    std::size_t n = 0;
    try {
        n = meta.at("num_nodes").get<std::size_t>();
        ds.num_classes = meta.at("num_classes").get<int>();
        ds.undirected = meta.value("undirected", false);
    } catch (const json::exception& e) {
        throw validation_error("meta.json: " + std::string(e.what()));
    }
    if (format.undirected) ds.undirected = *format.undirected;

    LoadReport local;
    {
        auto edges = read_edge_list(dir / "edges.tsv");
        local.raw_edge_lines = edges.size();
        if (ds.undirected) {
            const std::size_t m = edges.size();
            for (std::size_t i = 0; i < m; ++i) edges.push_back({edges[i].dst, edges[i].src});
            local.symmetrized = true;
        }
        ds.graph = Graph::from_edges(n, std::move(edges), &local.edges);
    }

    {
        const fs::path path = dir / "features.csv";
        auto in = detail::open_input(path);
        std::vector<double> values;
        std::string line;
        std::size_t lineno = 0;
        std::size_t width = 0;
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (detail::trim(line).empty()) continue;
            std::size_t count = 0;
            std::string_view rest = line;
            for (;;) {
                const auto comma = rest.find(',');
                values.push_back(detail::parse_number<double>(rest.substr(0, comma), path, lineno));
                ++count;
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            if (rows == 0) {
                width = count;
            } else if (count != width) {
                throw ragged_features_error(path.string() + ":" + std::to_string(lineno) + ": row has " +
                                            std::to_string(count) + " values, expected " + std::to_string(width));
            }
            ++rows;
        }
        if (rows != n) {
            throw ragged_features_error(path.string() + ": " + std::to_string(rows) + " rows for " +
                                        std::to_string(n) + " nodes");
        }
        ds.features = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(width));
    }

    {
        const fs::path path = dir / "labels.csv";
        auto in = detail::open_input(path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (detail::trim(line).empty()) continue;
            const int label = detail::parse_number<int>(line, path, lineno);
            if (label < 0 || label >= ds.num_classes) {
                throw label_range_error(path.string() + ":" + std::to_string(lineno) + ": label " +
                                        std::to_string(label) + " outside [0, " + std::to_string(ds.num_classes) +
                                        ")");
            }
            ds.labels.push_back(label);
        }
        if (ds.labels.size() != n) {
            throw validation_error(path.string() + ": " + std::to_string(ds.labels.size()) + " labels for " +
                                   std::to_string(n) + " nodes");
        }
    }

    {
        const json splits = detail::read_json(dir / "splits.json");
        if (splits.contains("splits")) {
            const json& named = splits.at("splits");
            if (named.is_array()) {
                for (std::size_t i = 0; i < named.size(); ++i) {
                    ds.splits.push_back(detail::split_from_json(named[i], std::to_string(i), n));
                }
            } else {
                // nlohmann::json objects iterate in key order; numeric-looking
                // names are ordered numerically so split "10" follows "9".
                std::vector<std::string> names;
                for (auto it = named.begin(); it != named.end(); ++it) names.push_back(it.key());
                std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
                    const bool na = !a.empty() && std::all_of(a.begin(), a.end(), ::isdigit);
                    const bool nb = !b.empty() && std::all_of(b.begin(), b.end(), ::isdigit);
                    if (na && nb) return std::stoll(a) < std::stoll(b);
                    if (na != nb) return na;
                    return a < b;
                });
                for (const auto& name : names) ds.splits.push_back(detail::split_from_json(named.at(name), name, n));
            }
        } else {
            ds.splits.push_back(detail::split_from_json(splits, "default", n));
        }
    }

    ds.validate();
    if (report) *report = local;
    return ds;
}

/// Writes `ds` in the layout `load_dataset` reads. Edges are written as stored
/// (already symmetric for undirected datasets); reloading re-symmetrizes, which
/// is idempotent.
inline void save_dataset(const fs::path& dir, const Dataset& ds) {
    fs::create_directories(dir);
    save_edges(dir / "edges.tsv", ds.graph);
    {
        auto out = detail::open_output(dir / "features.csv");
        out << std::setprecision(17);
        for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
            for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
                if (j) out << ',';
                out << ds.features(i, j);
            }
            out << '\n';
        }
    }
    {
        auto out = detail::open_output(dir / "labels.csv");
        for (int l : ds.labels) out << l << '\n';
    }
    {
        json splits;
        if (ds.splits.size() == 1 && ds.splits.front().name == "default") {
            splits = detail::split_to_json(ds.splits.front());
        } else {
            json named = json::object();
            for (const Split& s : ds.splits) named[s.name] = detail::split_to_json(s);
            splits["splits"] = named;
        }
        auto out = detail::open_output(dir / "splits.json");
        out << splits.dump() << '\n';
    }
    {
        auto out = detail::open_output(dir / "meta.json");
        out << json{{"num_nodes", ds.num_nodes()}, {"num_classes", ds.num_classes}, {"undirected", ds.undirected}}
                   .dump(2)
            << '\n';
    }
}

inline void write_json(const fs::path& path, const json& j) {
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw io_error("failed writing " + path.string());
}

inline void append_json_line(const fs::path& path, const json& j) {
    auto out = detail::open_output(path, true);
    out << j.dump() << '\n';
    if (!out) throw io_error("failed writing " + path.string());
}

inline std::string read_file_bytes(const fs::path& path) {
    auto in = detail::open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hetrewire
