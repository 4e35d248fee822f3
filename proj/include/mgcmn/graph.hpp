#pragma once

#include "mgcmn/dense_matrix.hpp"
#include "mgcmn/sparse_matrix.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgcmn {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

inline constexpr int kUnlabeled = -1;

/// Counters for what edge-list cleaning removed.
struct EdgeCleanup {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_dropped = 0;
};

/// Immutable undirected graph on nodes [0, n) with optional features and labels.
///
/// Edges are stored once per direction in a CSR neighbor array with sorted
/// rows. Self-loops and duplicate edges never survive construction.
class Graph {
public:
    Graph() : offsets_(1, 0) {}

    /// Builds from an arbitrary edge list. Duplicates (in either orientation)
    /// and self-loops are dropped and counted in `cleanup()`.
    Graph(std::size_t n_nodes, std::span<const Edge> edges, DenseMatrix features = {},
          std::vector<int> labels = {}, int n_classes = 0)
        : features_(std::move(features)), labels_(std::move(labels)), n_classes_(n_classes) {
        std::vector<Edge> canon;
        canon.reserve(edges.size());
        for (auto [u, v] : edges) {
            if (u >= n_nodes || v >= n_nodes)
                throw std::out_of_range("Graph: edge endpoint " + std::to_string(std::max(u, v)) +
                                        " outside [0," + std::to_string(n_nodes) + ")");
            if (u == v) {
                ++cleanup_.self_loops_dropped;
                continue;
            }
            canon.emplace_back(std::min(u, v), std::max(u, v));
        }
        std::sort(canon.begin(), canon.end());
        const auto before = canon.size();
        canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
        cleanup_.duplicates_dropped = before - canon.size();
        n_edges_ = canon.size();

        offsets_.assign(n_nodes + 1, 0);
        for (auto [u, v] : canon) {
            ++offsets_[u + 1];
            ++offsets_[v + 1];
        }
        for (std::size_t i = 0; i < n_nodes; ++i) offsets_[i + 1] += offsets_[i];
        neighbors_.resize(offsets_.back());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (auto [u, v] : canon) {
            neighbors_[cursor[u]++] = v;
            neighbors_[cursor[v]++] = u;
        }
        for (std::size_t i = 0; i < n_nodes; ++i)
            std::sort(neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                      neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));

        if (!features_.empty() && features_.rows() != n_nodes)
            throw std::invalid_argument("Graph: feature rows (" + std::to_string(features_.rows()) +
                                        ") != node count (" + std::to_string(n_nodes) + ")");
        if (!labels_.empty()) {
            if (labels_.size() != n_nodes) throw std::invalid_argument("Graph: label count != node count");
            for (std::size_t v = 0; v < n_nodes; ++v)
                if (labels_[v] != kUnlabeled && (labels_[v] < 0 || labels_[v] >= n_classes_))
                    throw std::invalid_argument("Graph: label of node " + std::to_string(v) + " outside [0," +
                                                std::to_string(n_classes_) + ")");
        }
    }

    std::size_t n_nodes() const noexcept { return offsets_.size() - 1; }
    std::size_t n_edges() const noexcept { return n_edges_; }
    std::size_t feature_dim() const noexcept { return features_.cols(); }
    int n_classes() const noexcept { return n_classes_; }

    const DenseMatrix& features() const noexcept { return features_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const EdgeCleanup& cleanup() const noexcept { return cleanup_; }

    std::span<const NodeId> neighbors(NodeId v) const {
        check_node(v);
        return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    std::size_t degree(NodeId v) const {
        check_node(v);
        return offsets_[v + 1] - offsets_[v];
    }

    bool has_edge(NodeId u, NodeId v) const {
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Each undirected edge once, as (min, max), in sorted order.
    std::vector<Edge> edge_list() const {
        std::vector<Edge> out;
        out.reserve(n_edges_);
        for (NodeId u = 0; u < n_nodes(); ++u)
            for (NodeId v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    /// Same topology, new features/labels.
    Graph with_attributes(DenseMatrix features, std::vector<int> labels, int n_classes) const {
        auto edges = edge_list();
        Graph g(n_nodes(), edges, std::move(features), std::move(labels), n_classes);
        g.cleanup_ = cleanup_;
        return g;
    }

private:
    void check_node(NodeId v) const {
        if (v >= n_nodes())
            throw std::out_of_range("node " + std::to_string(v) + " outside [0," + std::to_string(n_nodes()) + ")");
    }

    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
    std::size_t n_edges_ = 0;
    DenseMatrix features_;
    std::vector<int> labels_;
    int n_classes_ = 0;
    EdgeCleanup cleanup_;
};

inline std::size_t degree(const Graph& g, NodeId v) { return g.degree(v); }

inline std::size_t max_degree(const Graph& g) {
    std::size_t best = 0;
    for (NodeId v = 0; v < g.n_nodes(); ++v) best = std::max(best, g.degree(v));
    return best;
}

/// Binary adjacency matrix A with A(i,j) = 1 iff {i,j} is an edge.
inline SparseMatrix build_adjacency(const Graph& g) {
    const std::size_t n = g.n_nodes();
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<std::size_t> cols;
    cols.reserve(2 * g.n_edges());
    for (NodeId v = 0; v < n; ++v) {
        auto nb = g.neighbors(v);
        cols.insert(cols.end(), nb.begin(), nb.end());
        offsets[v + 1] = cols.size();
    }
    std::vector<double> vals(cols.size(), 1.0);
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

/// Relabels nodes: node v of `g` becomes perm[v]. Features and labels follow.
inline Graph permute_graph(const Graph& g, std::span<const NodeId> perm) {
    const std::size_t n = g.n_nodes();
    if (perm.size() != n) throw std::invalid_argument("permute_graph: permutation size mismatch");
    std::vector<Edge> edges;
    for (auto [u, v] : g.edge_list()) edges.emplace_back(perm[u], perm[v]);
    DenseMatrix feats;
    if (!g.features().empty()) {
        feats = DenseMatrix(n, g.feature_dim());
        for (NodeId v = 0; v < n; ++v)
            std::copy(g.features().row(v).begin(), g.features().row(v).end(), feats.row(perm[v]).begin());
    }
    std::vector<int> labels;
    if (!g.labels().empty()) {
        labels.assign(n, kUnlabeled);
        for (NodeId v = 0; v < n; ++v) labels[perm[v]] = g.labels()[v];
    }
    return Graph(n, edges, std::move(feats), std::move(labels), g.n_classes());
}

}  // namespace mgcmn
