#pragma once

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace hetrewire {

/// Exact Euclidean k-nearest-neighbor index. Results are ordered by
/// (squared distance, id), so equidistant points resolve to the smaller id.
class BallTree {
public:
    struct Neighbor {
        double dist2 = 0.0;
        node_id id = 0;

        friend bool operator<(const Neighbor& a, const Neighbor& b) {
            return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
        }
    };

    BallTree() = default;

    explicit BallTree(const Matrix& points, std::size_t leaf_size = 32) : leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
        const auto n = static_cast<std::size_t>(points.rows());
        order_.resize(n);
        for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<node_id>(i);
        points_ = points;
        if (n > 0) build(0, n);
        // Store points in tree order so leaves scan contiguous memory.
        Matrix reordered(points.rows(), points.cols());
        for (std::size_t i = 0; i < n; ++i) reordered.row(static_cast<Eigen::Index>(i)) = points.row(order_[i]);
        points_ = std::move(reordered);
    }

    std::size_t size() const noexcept { return order_.size(); }
    Eigen::Index dim() const noexcept { return points_.cols(); }

    std::vector<Neighbor> knn(std::span<const double> query, std::size_t k) const {
        std::vector<Neighbor> out;
        k = std::min(k, size());
        if (k == 0) return out;
        if (static_cast<Eigen::Index>(query.size()) != dim()) {
            throw validation_error("BallTree::knn: query dimension mismatch");
        }
        const Eigen::Map<const RowVector> q(query.data(), static_cast<Eigen::Index>(query.size()));
        std::priority_queue<Neighbor> heap;  // worst on top
        search(0, q, k, heap);
        out.resize(heap.size());
        for (std::size_t i = out.size(); i-- > 0;) {
            out[i] = heap.top();
            heap.pop();
        }
        return out;
    }

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        RowVector center;
        double radius = 0.0;
        int left = -1;
        int right = -1;
    };

    int build(std::size_t begin, std::size_t end) {
        const int index = static_cast<int>(nodes_.size());
        nodes_.push_back({begin, end, RowVector::Zero(points_.cols()), 0.0, -1, -1});

        RowVector center = RowVector::Zero(points_.cols());
        for (std::size_t i = begin; i < end; ++i) center += points_.row(order_[i]);
        center /= static_cast<double>(end - begin);
        double radius2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            radius2 = std::max(radius2, (points_.row(order_[i]) - center).squaredNorm());
        }
        nodes_[static_cast<std::size_t>(index)].center = center;
        // Slight inflation keeps the bound conservative under rounding.
        nodes_[static_cast<std::size_t>(index)].radius = std::sqrt(radius2) * (1.0 + 1e-12) + 1e-12;

        if (end - begin <= leaf_size_) return index;

        // Split at the median of the widest coordinate.
        Eigen::Index split_dim = 0;
        double best_spread = -1.0;
        for (Eigen::Index d = 0; d < points_.cols(); ++d) {
            double lo = points_(order_[begin], d);
            double hi = lo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                const double v = points_(order_[i], d);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                split_dim = d;
            }
        }
        if (best_spread <= 0.0) return index;  // all points coincide
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end), [&](node_id a, node_id b) {
                             const double va = points_(a, split_dim);
                             const double vb = points_(b, split_dim);
                             return va < vb || (va == vb && a < b);
                         });
        const int left = build(begin, mid);
        const int right = build(mid, end);
        nodes_[static_cast<std::size_t>(index)].left = left;
        nodes_[static_cast<std::size_t>(index)].right = right;
        return index;
    }

    static double lower_bound(const Node& node, const Eigen::Map<const RowVector>& q) {
        return std::max(0.0, (q - node.center).norm() - node.radius);
    }

    void search(int index, const Eigen::Map<const RowVector>& q, std::size_t k, std::priority_queue<Neighbor>& heap) const {
        const Node& node = nodes_[static_cast<std::size_t>(index)];
        if (heap.size() == k) {
            // Equality is not pruned: an equidistant point with a smaller id may
            // still displace the current worst.
            if (lower_bound(node, q) > std::sqrt(heap.top().dist2)) return;
        }
        if (node.left < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const Neighbor cand{(points_.row(static_cast<Eigen::Index>(i)) - q).squaredNorm(), order_[i]};
                if (heap.size() < k) {
                    heap.push(cand);
                } else if (cand < heap.top()) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        const Node& l = nodes_[static_cast<std::size_t>(node.left)];
        const Node& r = nodes_[static_cast<std::size_t>(node.right)];
        const double dl = (q - l.center).squaredNorm();
        const double dr = (q - r.center).squaredNorm();
        if (dl <= dr) {
            search(node.left, q, k, heap);
            search(node.right, q, k, heap);
        } else {
            search(node.right, q, k, heap);
            search(node.left, q, k, heap);
        }
    }

    std::size_t leaf_size_ = 32;
    Matrix points_;
    std::vector<node_id> order_;
    std::vector<Node> nodes_;
};

}  // namespace hetrewire
