#pragma once

// Randomized comparison of the triangle/wedge kernels against brute-force
// subgraph enumeration.

#include "mgcmn/graph.hpp"
#include "mgcmn/motif.hpp"
#include "mgcmn/motif_oracle.hpp"
#include "mgcmn/neural.hpp"

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgcmn {

/// Erdős–Rényi G(n, p) from the portable generator.
inline Graph random_graph(std::size_t n, double p, Rng& rng) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.uniform() < p) edges.emplace_back(u, v);
    return Graph(n, edges);
}

struct OracleMismatch {
    std::size_t graph = 0;
    std::size_t nodes = 0;
    std::string motif;
    std::size_t row = 0, col = 0;
    double kernel = 0.0, oracle = 0.0;
};

struct OracleCheckOptions {
    std::size_t n_graphs = 50;
    std::size_t min_n = 5;
    std::size_t max_n = 25;
    std::uint64_t seed = 1;
    MotifSemantics semantics = MotifSemantics::kCoOccurrence;
    /// Check only the complete graph on three nodes.
    bool k3_only = false;
    std::size_t max_reported = 20;

    void validate() const {
        if (max_n > 30) throw std::invalid_argument("oracle check: max_n must be at most 30");
        if (min_n < 1 || min_n > max_n) throw std::invalid_argument("oracle check: need 1 <= min_n <= max_n");
        if (n_graphs < 1) throw std::invalid_argument("oracle check: need at least one graph");
    }
};

struct OracleCheckReport {
    std::size_t graphs_checked = 0;
    std::size_t entries_compared = 0;
    std::size_t mismatch_count = 0;
    std::vector<OracleMismatch> mismatches;  // first max_reported
    /// Entries where the default co-occurrence wedge kernel differs from the
    /// edge-in-instance oracle (only populated in that mode; expected, not a failure).
    std::size_t intentional_wedge_divergence = 0;
    bool passed = true;
};

namespace detail {
inline void compare_motif(const SparseMatrix& kernel, const DenseMatrix& oracle, std::size_t graph_index,
                          const char* motif, const OracleCheckOptions& opt, OracleCheckReport& rep) {
    const std::size_t n = oracle.rows();
    const DenseMatrix k = kernel.to_dense();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ++rep.entries_compared;
            if (k(i, j) != oracle(i, j)) {
                ++rep.mismatch_count;
                if (rep.mismatches.size() < opt.max_reported)
                    rep.mismatches.push_back({graph_index, n, motif, i, j, k(i, j), oracle(i, j)});
            }
        }
}

inline std::size_t count_differences(const SparseMatrix& a, const DenseMatrix& b) {
    const DenseMatrix d = a.to_dense();
    std::size_t c = 0;
    for (std::size_t i = 0; i < d.size(); ++i) c += d.values()[i] != b.values()[i];
    return c;
}
}  // namespace detail

/// Exact entrywise comparison on random graphs with n in [min_n, max_n] and
/// edge probability drawn from [0.1, 0.7). In edge-in-instance mode the
/// kernels run in that mode too; how far the default co-occurrence wedge
/// kernel is from the literal definition is reported separately.
inline OracleCheckReport oracle_check(const OracleCheckOptions& opt) {
    opt.validate();
    OracleCheckReport rep;
    Rng rng(opt.seed);
    const std::size_t count = opt.k3_only ? 1 : opt.n_graphs;
    for (std::size_t gi = 0; gi < count; ++gi) {
        Graph g;
        if (opt.k3_only) {
            const std::vector<Edge> k3{{0, 1}, {1, 2}, {0, 2}};
            g = Graph(3, k3);
        } else {
            const std::size_t n = opt.min_n + rng.below(opt.max_n - opt.min_n + 1);
            const double p = rng.uniform(0.1, 0.7);
            g = random_graph(n, p, rng);
        }
        const auto adj = build_adjacency(g);
        detail::compare_motif(triangle_motif_matrix(adj), motif_matrix_oracle(g, MotifSpec::triangle(), opt.semantics),
                              gi, "triangle", opt, rep);
        const auto wedge_oracle = motif_matrix_oracle(g, MotifSpec::wedge(), opt.semantics);
        detail::compare_motif(wedge_motif_matrix(adj, opt.semantics), wedge_oracle, gi, "wedge", opt, rep);
        if (opt.semantics == MotifSemantics::kEdgeInInstance)
            rep.intentional_wedge_divergence +=
                detail::count_differences(wedge_motif_matrix(adj, MotifSemantics::kCoOccurrence), wedge_oracle);
        ++rep.graphs_checked;
    }
    rep.passed = rep.mismatch_count == 0;
    return rep;
}

}  // namespace mgcmn
