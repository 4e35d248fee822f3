#pragma once

// Brute-force subgraph enumeration for small motif patterns. Deliberately
// shares nothing with the intersection kernels in motif.hpp so it can serve
// as their reference.

#include "mgcmn/dense_matrix.hpp"
#include "mgcmn/graph.hpp"
#include "mgcmn/motif.hpp"

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgcmn {

enum class MotifKind { kTriangle, kWedge, kGeneric };

/// Motif pattern M = (V_M, E_M, v_M) over pattern nodes [0, node_count).
struct MotifSpec {
    MotifKind kind = MotifKind::kGeneric;
    std::size_t node_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t central = 0;

    static MotifSpec triangle() { return {MotifKind::kTriangle, 3, {{0, 1}, {1, 2}, {0, 2}}, 0}; }
    /// Path a–b–c centred on b.
    static MotifSpec wedge() { return {MotifKind::kWedge, 3, {{0, 1}, {1, 2}}, 1}; }
    static MotifSpec generic(std::size_t nodes, std::vector<std::pair<std::size_t, std::size_t>> edges,
                             std::size_t central = 0) {
        MotifSpec s{MotifKind::kGeneric, nodes, std::move(edges), central};
        s.validate();
        return s;
    }

    void validate() const {
        if (node_count < 2 || node_count > 5)
            throw std::invalid_argument("motif pattern must have 2 to 5 nodes");
        if (central >= node_count) throw std::invalid_argument("motif central node out of range");
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (auto [a, b] : edges) {
            if (a >= node_count || b >= node_count || a == b)
                throw std::invalid_argument("motif pattern edge is out of range or a self-loop");
            if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
                throw std::invalid_argument("motif pattern has a duplicate edge");
        }
        // Connectivity by flood fill.
        std::vector<bool> reached(node_count, false);
        std::vector<std::size_t> stack{0};
        reached[0] = true;
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            for (auto [a, b] : edges) {
                const std::size_t other = a == p ? b : (b == p ? a : node_count);
                if (other < node_count && !reached[other]) {
                    reached[other] = true;
                    stack.push_back(other);
                }
            }
        }
        if (std::find(reached.begin(), reached.end(), false) != reached.end())
            throw std::invalid_argument("motif pattern is not connected");
    }
};

/// A subgraph S = (V_S, E_S) of the host graph isomorphic to the pattern.
/// Both sets are sorted; edges are stored as (min, max).
struct MotifInstance {
    std::vector<NodeId> nodes;
    std::vector<Edge> edges;

    friend auto operator<=>(const MotifInstance&, const MotifInstance&) = default;
};

struct OracleOptions {
    std::size_t max_nodes = 200;
};

/// All distinct instances of `spec` in `g`. Two embeddings that produce the
/// same (V_S, E_S) are one instance, so pattern automorphisms are not counted
/// separately; non-induced occurrences are distinct when their edge sets
/// differ (a triangle holds three wedges).
inline std::vector<MotifInstance> enumerate_motif_instances(const Graph& g, const MotifSpec& spec,
                                                            const OracleOptions& opt = {}) {
    spec.validate();
    if (g.n_nodes() > opt.max_nodes)
        throw std::invalid_argument("oracle refuses graphs with more than " + std::to_string(opt.max_nodes) +
                                    " nodes (" + std::to_string(g.n_nodes()) +
                                    " given); use the optimized triangle/wedge kernels instead");
    const std::size_t k = spec.node_count;

    // Dense host adjacency so the oracle does not depend on CSR neighbor lists.
    const std::size_t n = g.n_nodes();
    std::vector<char> host(n * n, 0);
    for (auto [u, v] : g.edge_list()) host[u * n + v] = host[v * n + u] = 1;

    // Visit pattern nodes breadth-first so every node after the first is
    // constrained by an already placed neighbor.
    std::vector<std::size_t> order{spec.central};
    for (std::size_t head = 0; head < order.size(); ++head)
        for (auto [a, b] : spec.edges) {
            const std::size_t p = order[head];
            const std::size_t other = a == p ? b : (b == p ? a : k);
            if (other < k && std::find(order.begin(), order.end(), other) == order.end()) order.push_back(other);
        }
    std::vector<std::size_t> position(k);
    for (std::size_t i = 0; i < k; ++i) position[order[i]] = i;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (auto [a, b] : spec.edges) edges.emplace_back(position[a], position[b]);

    std::vector<std::vector<char>> pattern(k, std::vector<char>(k, 0));
    for (auto [a, b] : edges) pattern[a][b] = pattern[b][a] = 1;

    std::set<MotifInstance> found;
    std::vector<NodeId> image(k);
    std::vector<char> used(n, 0);

    auto record = [&] {
        MotifInstance inst;
        inst.nodes.assign(image.begin(), image.end());
        std::sort(inst.nodes.begin(), inst.nodes.end());
        for (auto [a, b] : edges) inst.edges.emplace_back(std::min(image[a], image[b]), std::max(image[a], image[b]));
        std::sort(inst.edges.begin(), inst.edges.end());
        found.insert(std::move(inst));
    };

    // Plain backtracking over every injective map V_M → V.
    auto extend = [&](auto&& self, std::size_t depth) -> void {
        if (depth == k) {
            record();
            return;
        }
        for (NodeId cand = 0; cand < n; ++cand) {
            if (used[cand]) continue;
            bool ok = true;
            for (std::size_t prev = 0; prev < depth && ok; ++prev)
                if (pattern[depth][prev] && !host[cand * n + image[prev]]) ok = false;
            if (!ok) continue;
            used[cand] = 1;
            image[depth] = cand;
            self(self, depth + 1);
            used[cand] = 0;
        }
    };
    extend(extend, 0);
    return {found.begin(), found.end()};
}

/// Dense motif matrix built by counting enumerated instances.
inline DenseMatrix motif_matrix_oracle(const Graph& g, const MotifSpec& spec,
                                       MotifSemantics semantics = MotifSemantics::kCoOccurrence,
                                       const OracleOptions& opt = {}) {
    const auto instances = enumerate_motif_instances(g, spec, opt);
    DenseMatrix m(g.n_nodes(), g.n_nodes());
    for (const auto& inst : instances) {
        for (NodeId v : inst.nodes) m(v, v) += 1.0;
        if (semantics == MotifSemantics::kCoOccurrence) {
            for (std::size_t i = 0; i < inst.nodes.size(); ++i)
                for (std::size_t j = i + 1; j < inst.nodes.size(); ++j) {
                    m(inst.nodes[i], inst.nodes[j]) += 1.0;
                    m(inst.nodes[j], inst.nodes[i]) += 1.0;
                }
        } else {
            for (auto [u, v] : inst.edges) {
                m(u, v) += 1.0;
                m(v, u) += 1.0;
            }
        }
    }
    return m;
}

}  // namespace mgcmn
