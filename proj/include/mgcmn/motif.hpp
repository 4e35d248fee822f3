#pragma once

#include "mgcmn/graph.hpp"
#include "mgcmn/parallel.hpp"
#include "mgcmn/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mgcmn {

/// How a motif instance contributes to entry (u, v) of a motif matrix.
///
/// kCoOccurrence counts instances whose node set holds both u and v.
/// kEdgeInInstance counts instances whose edge set holds {u, v}. The two
/// agree for triangles and differ for wedge leaf pairs. Both keep the
/// extended diagonal: (v, v) counts instances containing v.
enum class MotifSemantics { kCoOccurrence, kEdgeInInstance };

inline std::string_view to_string(MotifSemantics s) {
    return s == MotifSemantics::kCoOccurrence ? "co_occurrence" : "edge_in_instance";
}

inline MotifSemantics parse_semantics(std::string_view text) {
    if (text == "co_occurrence") return MotifSemantics::kCoOccurrence;
    if (text == "edge_in_instance") return MotifSemantics::kEdgeInInstance;
    throw std::invalid_argument("unknown motif semantics '" + std::string(text) +
                                "' (expected co_occurrence or edge_in_instance)");
}

namespace detail {

inline void require_binary_adjacency(const SparseMatrix& a) {
    for (std::size_t r = 0; r < a.n(); ++r) {
        auto cols = a.row_cols(r);
        auto vals = a.row_values(r);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == r) throw std::invalid_argument("motif kernel: adjacency has a nonzero diagonal");
            if (vals[k] != 1.0) throw std::invalid_argument("motif kernel: adjacency is not binary");
        }
    }
}

inline std::size_t intersection_size(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::size_t i = 0, j = 0, count = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

struct RowBuffer {
    std::vector<std::size_t> cols;
    std::vector<double> vals;
};

/// Assembles a CSR matrix from independently computed rows.
inline SparseMatrix assemble_rows(std::size_t n, std::vector<RowBuffer>& rows) {
    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t r = 0; r < n; ++r) offsets[r + 1] = offsets[r] + rows[r].cols.size();
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(offsets.back());
    vals.reserve(offsets.back());
    for (auto& row : rows) {
        cols.insert(cols.end(), row.cols.begin(), row.cols.end());
        vals.insert(vals.end(), row.vals.begin(), row.vals.end());
        row = {};
    }
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace detail

/// Triangle motif matrix from a binary adjacency matrix.
///
/// Off-diagonal (u, v) is the number of triangles holding both u and v, which
/// is |N(u) ∩ N(v)| on edges and zero elsewhere. Diagonal (v, v) is the number
/// of triangles holding v. Semantics do not matter for triangles.
inline SparseMatrix triangle_motif_matrix(const SparseMatrix& adjacency, unsigned threads = 1) {
    detail::require_binary_adjacency(adjacency);
    const std::size_t n = adjacency.n();
    std::vector<detail::RowBuffer> rows(n);
    parallel_for(n, threads, [&](std::size_t u, unsigned) {
        auto nu = adjacency.row_cols(u);
        auto& row = rows[u];
        std::size_t twice_diag = 0;
        for (std::size_t v : nu) {
            const std::size_t common = detail::intersection_size(nu, adjacency.row_cols(v));
            twice_diag += common;
            if (common > 0) {
                row.cols.push_back(v);
                row.vals.push_back(static_cast<double>(common));
            }
        }
        // Every triangle at u is seen once from each of its two edges at u.
        if (twice_diag > 0) {
            auto at = std::lower_bound(row.cols.begin(), row.cols.end(), u);
            const auto pos = at - row.cols.begin();
            row.cols.insert(at, u);
            row.vals.insert(row.vals.begin() + pos, static_cast<double>(twice_diag / 2));
        }
    });
    return detail::assemble_rows(n, rows);
}

/// Wedge (path on three nodes) motif matrix from a binary adjacency matrix.
///
/// Under co-occurrence, (u, v) = [uv ∈ E]·(d(u) + d(v) − 2) + |N(u) ∩ N(v)|.
/// Under edge-in-instance the common-neighbor term is dropped. The diagonal
/// is C(d(v), 2) + Σ_{u ∈ N(v)} (d(u) − 1) in both cases.
inline SparseMatrix wedge_motif_matrix(const SparseMatrix& adjacency,
                                       MotifSemantics semantics = MotifSemantics::kCoOccurrence,
                                       unsigned threads = 1) {
    detail::require_binary_adjacency(adjacency);
    const std::size_t n = adjacency.n();
    auto deg = [&](std::size_t v) { return static_cast<std::uint64_t>(adjacency.row_cols(v).size()); };
    std::vector<detail::RowBuffer> rows(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::vector<std::uint64_t>> accumulators(workers);
    std::vector<std::vector<std::size_t>> touched_lists(workers);

    parallel_for(n, workers, [&](std::size_t u, unsigned worker) {
        auto& acc = accumulators[worker];
        auto& touched = touched_lists[worker];
        if (acc.size() != n) acc.assign(n, 0);
        touched.clear();
        auto bump = [&](std::size_t w, std::uint64_t by) {
            if (by == 0) return;
            if (acc[w] == 0) touched.push_back(w);
            acc[w] += by;
        };
        const std::uint64_t du = deg(u);
        std::uint64_t diag = du * (du - (du > 0 ? 1 : 0)) / 2;
        for (std::size_t c : adjacency.row_cols(u)) {
            diag += deg(c) - 1;
            if (semantics == MotifSemantics::kCoOccurrence)
                for (std::size_t w : adjacency.row_cols(c))
                    if (w != u) bump(w, 1);
            bump(c, du + deg(c) - 2);
        }
        bump(u, diag);
        std::sort(touched.begin(), touched.end());
        auto& row = rows[u];
        row.cols.reserve(touched.size());
        row.vals.reserve(touched.size());
        for (std::size_t w : touched) {
            row.cols.push_back(w);
            row.vals.push_back(static_cast<double>(acc[w]));
            acc[w] = 0;
        }
    });
    return detail::assemble_rows(n, rows);
}

/// D̃^{-1/2} M̃ D̃^{-1/2} with M̃ = M (+ I when add_self_loops) and D̃ the row
/// sums of M̃. Zero rows stay zero.
inline SparseMatrix normalize_symmetric(const SparseMatrix& m, bool add_self_loops) {
    const std::size_t n = m.n();
    for (double v : m.values())
        if (v < 0.0) throw std::invalid_argument("normalize_symmetric: negative entry");

    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(m.nnz() + (add_self_loops ? n : 0));
    vals.reserve(cols.capacity());
    for (std::size_t r = 0; r < n; ++r) {
        auto rc = m.row_cols(r);
        auto rv = m.row_values(r);
        bool diag_done = !add_self_loops;
        for (std::size_t k = 0; k < rc.size(); ++k) {
            if (!diag_done && rc[k] >= r) {
                if (rc[k] == r) {
                    cols.push_back(r);
                    vals.push_back(rv[k] + 1.0);
                    diag_done = true;
                    continue;
                }
                cols.push_back(r);
                vals.push_back(1.0);
                diag_done = true;
            }
            cols.push_back(rc[k]);
            vals.push_back(rv[k]);
        }
        if (!diag_done) {
            cols.push_back(r);
            vals.push_back(1.0);
        }
        offsets[r + 1] = cols.size();
    }

    std::vector<double> inv_sqrt(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) s += vals[k];
        if (s > 0.0) inv_sqrt[r] = 1.0 / std::sqrt(s);
    }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k)
            vals[k] *= inv_sqrt[r] * inv_sqrt[cols[k]];
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

enum class MatrixSource { kEdge, kTriangle, kWedge };

inline std::string_view to_string(MatrixSource s) {
    switch (s) {
        case MatrixSource::kEdge: return "edge";
        case MatrixSource::kTriangle: return "triangle";
        case MatrixSource::kWedge: return "wedge";
    }
    return "?";
}

inline MatrixSource parse_matrix_source(std::string_view text) {
    if (text == "edge") return MatrixSource::kEdge;
    if (text == "triangle") return MatrixSource::kTriangle;
    if (text == "wedge") return MatrixSource::kWedge;
    throw std::invalid_argument("unknown matrix source '" + std::string(text) +
                                "' (expected edge, triangle or wedge)");
}

struct MixComponent {
    MatrixSource source;
    double weight;
};

/// Weighted blend of normalized edge/motif matrices, e.g. "edge:8,triangle:1,wedge:3".
struct MixRecipe {
    std::vector<MixComponent> components;

    void validate() const {
        if (components.empty()) throw std::invalid_argument("mix recipe: no components");
        double total = 0.0;
        for (const auto& c : components) {
            if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
                throw std::invalid_argument("mix recipe: weights must be finite and nonnegative");
            total += c.weight;
        }
        if (total <= 0.0) throw std::invalid_argument("mix recipe: all weights are zero");
    }

    /// Weights rescaled to sum to one.
    std::vector<double> normalized_weights() const {
        validate();
        double total = 0.0;
        for (const auto& c : components) total += c.weight;
        std::vector<double> w;
        for (const auto& c : components) w.push_back(c.weight / total);
        return w;
    }

    static MixRecipe parse(std::string_view text) {
        MixRecipe recipe;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto comma = text.find(',', pos);
            if (comma == std::string_view::npos) comma = text.size();
            auto item = text.substr(pos, comma - pos);
            while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
            while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
            if (item.empty()) throw std::invalid_argument("mix recipe: empty component in '" + std::string(text) + "'");
            auto colon = item.find(':');
            if (colon == std::string_view::npos)
                throw std::invalid_argument("mix recipe: component '" + std::string(item) + "' lacks ':weight'");
            const auto source = parse_matrix_source(item.substr(0, colon));
            const std::string weight_text(item.substr(colon + 1));
            std::size_t used = 0;
            double weight = 0.0;
            try {
                weight = std::stod(weight_text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != weight_text.size())
                throw std::invalid_argument("mix recipe: bad weight '" + weight_text + "'");
            recipe.components.push_back({source, weight});
            pos = comma + 1;
        }
        recipe.validate();
        return recipe;
    }

    std::string to_string() const {
        std::ostringstream out;
        out.precision(17);
        for (std::size_t i = 0; i < components.size(); ++i) {
            if (i) out << ',';
            out << mgcmn::to_string(components[i].source) << ':' << components[i].weight;
        }
        return out.str();
    }

    friend bool operator==(const MixRecipe& a, const MixRecipe& b) {
        if (a.components.size() != b.components.size()) return false;
        for (std::size_t i = 0; i < a.components.size(); ++i)
            if (a.components[i].source != b.components[i].source || a.components[i].weight != b.components[i].weight)
                return false;
        return true;
    }
};

struct MixOptions {
    MotifSemantics semantics = MotifSemantics::kCoOccurrence;
    unsigned threads = 1;
};

struct MixResult {
    SparseMatrix matrix;
    /// Effective weight per recipe component after dropping and rescaling.
    std::vector<double> weights;
    std::vector<std::string> warnings;
};

inline SparseMatrix build_source_matrix(MatrixSource source, const SparseMatrix& adjacency, const MixOptions& opt) {
    switch (source) {
        case MatrixSource::kEdge: return adjacency;
        case MatrixSource::kTriangle: return triangle_motif_matrix(adjacency, opt.threads);
        case MatrixSource::kWedge: return wedge_motif_matrix(adjacency, opt.semantics, opt.threads);
    }
    throw std::logic_error("unreachable");
}

/// Normalizes each component (the edge matrix with +I, motif matrices without,
/// their diagonal already carries self-affinity) and blends them with weights
/// rescaled to sum to one. All-zero motif matrices are dropped with a warning.
inline MixResult mix_matrices(const MixRecipe& recipe, const Graph& graph, const MixOptions& opt = {}) {
    recipe.validate();
    const auto adjacency = build_adjacency(graph);
    const std::size_t n = graph.n_nodes();

    MixResult result;
    std::vector<SparseMatrix> normalized(recipe.components.size());
    std::vector<double> weights(recipe.components.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < recipe.components.size(); ++i) {
        const auto& c = recipe.components[i];
        if (c.weight == 0.0) continue;
        auto m = build_source_matrix(c.source, adjacency, opt);
        const bool self_loops = c.source == MatrixSource::kEdge;
        if (m.nnz() == 0 && !self_loops) {
            result.warnings.push_back("component '" + std::string(to_string(c.source)) +
                                      "' has an all-zero matrix and was dropped");
            continue;
        }
        normalized[i] = normalize_symmetric(m, self_loops);
        weights[i] = c.weight;
        total += c.weight;
    }
    if (total <= 0.0) throw std::invalid_argument("mix_matrices: every weighted component was dropped");

    std::vector<SparseMatrix::Triplet> triplets;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        if (weights[i] == 0.0) continue;
        weights[i] /= total;
        const auto& m = normalized[i];
        for (std::size_t r = 0; r < n; ++r) {
            auto rc = m.row_cols(r);
            auto rv = m.row_values(r);
            for (std::size_t k = 0; k < rc.size(); ++k) triplets.push_back({r, rc[k], weights[i] * rv[k]});
        }
    }
    result.matrix = SparseMatrix::from_triplets(n, std::move(triplets));
    result.weights = std::move(weights);
    return result;
}

inline std::uint64_t count_triangles(const Graph& g) {
    std::uint64_t three_times = 0;
    for (NodeId u = 0; u < g.n_nodes(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v) three_times += detail::intersection_size(g.neighbors(u), g.neighbors(v));
    return three_times / 3;
}

/// Number of wedges, Σ_v C(d(v), 2).
inline std::uint64_t count_wedges(const Graph& g) {
    std::uint64_t total = 0;
    for (NodeId v = 0; v < g.n_nodes(); ++v) {
        const std::uint64_t d = g.degree(v);
        if (d >= 2) total += d * (d - 1) / 2;
    }
    return total;
}

/// Global clustering coefficient 3·triangles / wedges.
inline double clustering_coefficient(const Graph& g) {
    const auto wedges = count_wedges(g);
    if (wedges == 0) throw std::domain_error("undefined clustering coefficient: graph has no wedges");
    return 3.0 * static_cast<double>(count_triangles(g)) / static_cast<double>(wedges);
}

}  // namespace mgcmn
