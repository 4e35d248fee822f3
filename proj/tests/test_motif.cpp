#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace mgcmn;
using namespace mgcmn::testing;

namespace {

/// Triangle co-occurrence counts by triple loop over node triples.
DenseMatrix reference_triangles(const Graph& g) {
    const std::size_t n = g.n_nodes();
    DenseMatrix m(n, n);
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            for (NodeId c = b + 1; c < n; ++c) {
                if (!(g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c))) continue;
                const NodeId t[3] = {a, b, c};
                for (NodeId x : t)
                    for (NodeId y : t) m(x, y) += 1.0;
            }
    return m;
}

/// Wedge counts by enumerating every (centre, leaf pair). With
/// `edge_only`, an off-diagonal pair counts only when it is a wedge edge.
DenseMatrix reference_wedges(const Graph& g, bool edge_only = false) {
    const std::size_t n = g.n_nodes();
    DenseMatrix m(n, n);
    for (NodeId c = 0; c < n; ++c)
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b) {
                if (a == c || b == c || !g.has_edge(c, a) || !g.has_edge(c, b)) continue;
                const NodeId t[3] = {a, c, b};
                for (NodeId x : t)
                    for (NodeId y : t) {
                        const bool leaf_pair = (x == a && y == b) || (x == b && y == a);
                        if (edge_only && leaf_pair) continue;
                        m(x, y) += 1.0;
                    }
            }
    return m;
}

Graph random_test_graph(std::size_t n, double p, std::uint64_t seed) {
    Rng rng(seed);
    return random_graph(n, p, rng);
}

}  // namespace

TEST(TriangleMatrix, SingleTriangle) {
    const auto t = triangle_motif_matrix(build_adjacency(complete_graph(3)));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t.at(i, j), 1.0);
}

TEST(TriangleMatrix, PathIsTriangleFree) {
    EXPECT_EQ(triangle_motif_matrix(build_adjacency(path_graph(3))).nnz(), 0u);
}

TEST(TriangleMatrix, CompleteGraphOnFourNodes) {
    const auto t = triangle_motif_matrix(build_adjacency(complete_graph(4)));
    EXPECT_EQ(t.at(0, 1), 2.0);
    EXPECT_EQ(t.at(2, 2), 3.0);
}

TEST(TriangleMatrix, RejectsNonBinaryOrAsymmetricInput) {
    auto weighted = SparseMatrix::from_triplets(2, {{0, 1, 2.0}, {1, 0, 2.0}});
    EXPECT_THROW(triangle_motif_matrix(weighted), std::invalid_argument);
    auto looped = SparseMatrix::from_triplets(2, {{0, 0, 1.0}});
    EXPECT_THROW(triangle_motif_matrix(looped), std::invalid_argument);
    EXPECT_THROW(wedge_motif_matrix(weighted), std::invalid_argument);
}

TEST(WedgeMatrix, SingleWedge) {
    const auto w = wedge_motif_matrix(build_adjacency(path_graph(3)));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(w.at(i, j), 1.0) << i << "," << j;
}

TEST(WedgeMatrix, TriangleHoldsThreeWedges) {
    const auto w = wedge_motif_matrix(build_adjacency(complete_graph(3)));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(w.at(i, j), 3.0);
}

TEST(WedgeMatrix, MatchesClosedForm) {
    const Graph g = random_test_graph(20, 0.3, 4);
    const auto w = wedge_motif_matrix(build_adjacency(g));
    for (NodeId u = 0; u < g.n_nodes(); ++u) {
        const double du = static_cast<double>(g.degree(u));
        double diag = du * (du - 1) / 2;
        for (NodeId c : g.neighbors(u)) diag += static_cast<double>(g.degree(c)) - 1;
        EXPECT_EQ(w.at(u, u), diag);
        for (NodeId v = 0; v < g.n_nodes(); ++v) {
            if (u == v) continue;
            std::size_t common = 0;
            for (NodeId c : g.neighbors(u)) common += g.has_edge(c, v) ? 1 : 0;
            const double expected =
                (g.has_edge(u, v) ? du + static_cast<double>(g.degree(v)) - 2 : 0.0) + static_cast<double>(common);
            EXPECT_EQ(w.at(u, v), expected);
        }
    }
}

TEST(Enumeration, CountsInstances) {
    EXPECT_EQ(enumerate_motif_instances(complete_graph(3), MotifSpec::triangle()).size(), 1u);
    EXPECT_EQ(enumerate_motif_instances(complete_graph(4), MotifSpec::triangle()).size(), 4u);
    EXPECT_EQ(enumerate_motif_instances(complete_graph(4), MotifSpec::wedge()).size(), 12u);
    EXPECT_EQ(enumerate_motif_instances(complete_graph(3), MotifSpec::wedge()).size(), 3u);
    // A 4-cycle pattern in K4: three distinct edge sets.
    const auto c4 = MotifSpec::generic(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    EXPECT_EQ(enumerate_motif_instances(complete_graph(4), c4).size(), 3u);
}

TEST(Enumeration, InstancesAreGenuineSubgraphs) {
    const Graph g = random_test_graph(12, 0.4, 8);
    for (const auto& inst : enumerate_motif_instances(g, MotifSpec::wedge())) {
        EXPECT_EQ(inst.nodes.size(), 3u);
        EXPECT_EQ(inst.edges.size(), 2u);
        for (auto [u, v] : inst.edges) {
            EXPECT_TRUE(g.has_edge(u, v));
            EXPECT_TRUE(std::binary_search(inst.nodes.begin(), inst.nodes.end(), u));
            EXPECT_TRUE(std::binary_search(inst.nodes.begin(), inst.nodes.end(), v));
        }
    }
}

TEST(Enumeration, RejectsOversizedGraphAndBadPatterns) {
    const Graph big(201, std::vector<Edge>{});
    EXPECT_THROW(enumerate_motif_instances(big, MotifSpec::triangle()), std::invalid_argument);
    EXPECT_THROW(MotifSpec::generic(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}), std::invalid_argument);
    EXPECT_THROW(MotifSpec::generic(4, {{0, 1}, {2, 3}}), std::invalid_argument);
    EXPECT_THROW(MotifSpec::generic(3, {{0, 1}, {1, 0}, {1, 2}}), std::invalid_argument);
}

TEST(Oracle, EmptyGraphGivesZeroMatrix) {
    const Graph g(5, std::vector<Edge>{});
    EXPECT_EQ(motif_matrix_oracle(g, MotifSpec::triangle()), DenseMatrix(5, 5));
    EXPECT_EQ(motif_matrix_oracle(g, MotifSpec::wedge()), DenseMatrix(5, 5));
}

TEST(Oracle, AgreesWithIndependentReference) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Graph g = random_test_graph(10 + seed, 0.35, 100 + seed);
        EXPECT_EQ(motif_matrix_oracle(g, MotifSpec::triangle()), reference_triangles(g));
        EXPECT_EQ(motif_matrix_oracle(g, MotifSpec::wedge()), reference_wedges(g));
    }
}

TEST(Kernels, EqualOracleOnRandomGraphs) {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 5 + rng.below(21);
        const Graph g = random_graph(n, rng.uniform(0.1, 0.7), rng);
        const auto a = build_adjacency(g);
        EXPECT_EQ(triangle_motif_matrix(a).to_dense(), motif_matrix_oracle(g, MotifSpec::triangle())) << "graph " << i;
        EXPECT_EQ(wedge_motif_matrix(a).to_dense(), motif_matrix_oracle(g, MotifSpec::wedge())) << "graph " << i;
    }
}

TEST(Kernels, EdgeInInstanceSemantics) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Graph g = random_test_graph(15, 0.3, 200 + seed);
        const auto a = build_adjacency(g);
        const auto w = wedge_motif_matrix(a, MotifSemantics::kEdgeInInstance).to_dense();
        EXPECT_EQ(w, reference_wedges(g, true));
        EXPECT_EQ(w, motif_matrix_oracle(g, MotifSpec::wedge(), MotifSemantics::kEdgeInInstance));
        // Triangles agree under both semantics: every node pair in a triangle is an edge.
        EXPECT_EQ(motif_matrix_oracle(g, MotifSpec::triangle(), MotifSemantics::kEdgeInInstance),
                  triangle_motif_matrix(a).to_dense());
    }
    // The open leaf pair of a single wedge is not a wedge edge.
    const auto p = wedge_motif_matrix(build_adjacency(path_graph(3)), MotifSemantics::kEdgeInInstance);
    EXPECT_EQ(p.at(0, 2), 0.0);
    EXPECT_EQ(p.at(0, 1), 1.0);
}

TEST(Kernels, StructuralProperties) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = random_test_graph(25, 0.3, 300 + seed);
        const auto a = build_adjacency(g);
        const auto t = triangle_motif_matrix(a);
        const auto w = wedge_motif_matrix(a);
        const auto a_dense = a.to_dense();
        const auto a2 = naive_matmul(a_dense, a_dense);
        for (std::size_t i = 0; i < g.n_nodes(); ++i)
            for (std::size_t j = 0; j < g.n_nodes(); ++j) {
                // Triangle zero-preservation.
                if (i != j && a_dense(i, j) == 0.0) {
                    EXPECT_EQ(t.at(i, j), 0.0);
                }
                // Wedge support lies inside A + A^2.
                if (w.at(i, j) != 0.0) {
                    EXPECT_NE(a_dense(i, j) + a2(i, j), 0.0);
                }
                // Symmetric, nonnegative, integer-valued.
                for (const auto* m : {&t, &w}) {
                    EXPECT_EQ(m->at(i, j), m->at(j, i));
                    EXPECT_GE(m->at(i, j), 0.0);
                    EXPECT_EQ(m->at(i, j), std::floor(m->at(i, j)));
                }
            }
    }
}

TEST(Kernels, WedgeSparsityBoundOnDenseEnoughGraphs) {
    // nnz <= 2|E|D; the bound is asymptotic and is checked where D >= 3.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = random_test_graph(40, 0.15, 400 + seed);
        const auto d = max_degree(g);
        if (d < 3) continue;
        EXPECT_LE(wedge_motif_matrix(build_adjacency(g)).nnz(), 2 * g.n_edges() * d);
    }
}

TEST(Kernels, ThreadCountDoesNotChangeResult) {
    const Graph g = random_test_graph(60, 0.2, 9);
    const auto a = build_adjacency(g);
    const auto t1 = triangle_motif_matrix(a, 1);
    const auto w1 = wedge_motif_matrix(a, MotifSemantics::kCoOccurrence, 1);
    for (unsigned threads : {2u, 3u, 7u}) {
        const auto t = triangle_motif_matrix(a, threads);
        const auto w = wedge_motif_matrix(a, MotifSemantics::kCoOccurrence, threads);
        EXPECT_EQ(t.col_indices(), t1.col_indices());
        EXPECT_EQ(t.values(), t1.values());
        EXPECT_EQ(w.col_indices(), w1.col_indices());
        EXPECT_EQ(w.values(), w1.values());
    }
}

TEST(Normalize, IdentityStaysIdentity) {
    const auto i = normalize_symmetric(SparseMatrix::identity(4), false);
    EXPECT_EQ(i.to_dense(), DenseMatrix::identity(4));
}

TEST(Normalize, TriangleWithSelfLoopsIsUniform) {
    const auto n = normalize_symmetric(build_adjacency(complete_graph(3)), true);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(n.at(i, j), 1.0 / 3.0, 1e-15);
}

TEST(Normalize, MatchesDenseDefinition) {
    const Graph g = random_test_graph(30, 0.15, 12);
    const auto a = build_adjacency(g);
    for (bool loops : {false, true}) {
        const auto n = normalize_symmetric(a, loops);
        EXPECT_LT(max_abs_diff(n.to_dense(), dense_sym_normalize(a.to_dense(), loops)), 1e-14);
    }
    const auto w = wedge_motif_matrix(a);
    const auto nw = normalize_symmetric(w, false);
    EXPECT_LT(max_abs_diff(nw.to_dense(), dense_sym_normalize(w.to_dense(), false)), 1e-14);
    EXPECT_TRUE(nw.same_structure(w));
    // Similar to the row-stochastic D^-1 M, so its spectral radius is at most
    // one (row sums themselves may exceed one).
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto x = random_dense(nw.n(), 1, 50 + seed);
        const auto y = spmm(nw, x);
        double nx = 0.0, ny = 0.0;
        for (double v : x.values()) nx += v * v;
        for (double v : y.values()) ny += v * v;
        EXPECT_LE(std::sqrt(ny), std::sqrt(nx) * (1.0 + 1e-9));
    }
}

TEST(Normalize, IsolatedNodeKeepsZeroRow) {
    const Graph g(4, std::vector<Edge>{{0, 1}, {1, 2}});
    const auto n = normalize_symmetric(build_adjacency(g), false);
    EXPECT_EQ(n.row_cols(3).size(), 0u);
}

TEST(Normalize, RejectsNegativeEntries) {
    auto m = SparseMatrix::from_triplets(2, {{0, 1, -1.0}, {1, 0, -1.0}});
    EXPECT_THROW(normalize_symmetric(m, false), std::invalid_argument);
}

TEST(Mix, EdgeOnlyIsGcnMatrix) {
    const Graph g = random_test_graph(20, 0.2, 13);
    const auto mix = mix_matrices(MixRecipe::parse("edge:1"), g);
    const auto expected = dense_sym_normalize(build_adjacency(g).to_dense(), true);
    EXPECT_LT(max_abs_diff(mix.matrix.to_dense(), expected), 1e-15);
    EXPECT_TRUE(mix.warnings.empty());
}

TEST(Mix, WeightsAreRescaled) {
    const Graph g = complete_graph(5);
    const auto mix = mix_matrices(MixRecipe::parse("edge:8,triangle:1,wedge:2"), g);
    ASSERT_EQ(mix.weights.size(), 3u);
    EXPECT_DOUBLE_EQ(mix.weights[0], 8.0 / 11.0);
    EXPECT_DOUBLE_EQ(mix.weights[1], 1.0 / 11.0);
    EXPECT_DOUBLE_EQ(mix.weights[2], 2.0 / 11.0);
    const auto doubled = mix_matrices(MixRecipe::parse("edge:16,triangle:2,wedge:4"), g);
    EXPECT_LT(max_abs_diff(mix.matrix.to_dense(), doubled.matrix.to_dense()), 1e-15);
}

TEST(Mix, MatchesWeightedSumOfDenseComponents) {
    const Graph g = random_test_graph(25, 0.25, 14);
    const auto a = build_adjacency(g);
    const auto mix = mix_matrices(MixRecipe::parse("edge:8,triangle:1,wedge:3"), g);
    const auto e = dense_sym_normalize(a.to_dense(), true);
    const auto t = dense_sym_normalize(reference_triangles(g), false);
    const auto w = dense_sym_normalize(reference_wedges(g), false);
    DenseMatrix expected(g.n_nodes(), g.n_nodes());
    for (std::size_t i = 0; i < expected.size(); ++i)
        expected.values()[i] = (8 * e.values()[i] + t.values()[i] + 3 * w.values()[i]) / 12.0;
    EXPECT_LT(max_abs_diff(mix.matrix.to_dense(), expected), 1e-14);
}

TEST(Mix, OutputIsSymmetricForRandomRecipes) {
    const Graph g = random_test_graph(30, 0.2, 15);
    Rng rng(16);
    for (int i = 0; i < 10; ++i) {
        MixRecipe r{{{MatrixSource::kEdge, rng.uniform(0.1, 5)},
                     {MatrixSource::kTriangle, rng.uniform(0, 5)},
                     {MatrixSource::kWedge, rng.uniform(0, 5)}}};
        const auto m = mix_matrices(r, g).matrix.to_dense();
        for (std::size_t u = 0; u < m.rows(); ++u)
            for (std::size_t v = 0; v < m.cols(); ++v) EXPECT_NEAR(m(u, v), m(v, u), 1e-12);
    }
}

TEST(Mix, DropsAllZeroMotifComponentWithWarning) {
    const auto mix = mix_matrices(MixRecipe::parse("edge:8,triangle:1,wedge:2"), path_graph(4));
    ASSERT_EQ(mix.warnings.size(), 1u);
    EXPECT_NE(mix.warnings[0].find("triangle"), std::string::npos);
    EXPECT_EQ(mix.weights[1], 0.0);
    EXPECT_DOUBLE_EQ(mix.weights[0], 0.8);
    EXPECT_DOUBLE_EQ(mix.weights[2], 0.2);
    EXPECT_THROW(mix_matrices(MixRecipe::parse("triangle:1"), path_graph(4)), std::invalid_argument);
}

TEST(Mix, RecipeParsing) {
    const auto r = MixRecipe::parse(" edge:8, triangle:1 ,wedge:2.5");
    ASSERT_EQ(r.components.size(), 3u);
    EXPECT_EQ(r.components[2].source, MatrixSource::kWedge);
    EXPECT_EQ(r.components[2].weight, 2.5);
    EXPECT_EQ(MixRecipe::parse(r.to_string()), r);
    EXPECT_THROW(MixRecipe::parse(""), std::invalid_argument);
    EXPECT_THROW(MixRecipe::parse("edge"), std::invalid_argument);
    EXPECT_THROW(MixRecipe::parse("edge:x"), std::invalid_argument);
    EXPECT_THROW(MixRecipe::parse("square:1"), std::invalid_argument);
    EXPECT_THROW(MixRecipe::parse("edge:-1,wedge:2"), std::invalid_argument);
    EXPECT_THROW(MixRecipe::parse("edge:0,wedge:0"), std::invalid_argument);
}

TEST(ClusteringCoefficient, KnownGraphs) {
    EXPECT_DOUBLE_EQ(clustering_coefficient(complete_graph(3)), 1.0);
    EXPECT_DOUBLE_EQ(clustering_coefficient(complete_graph(6)), 1.0);
    EXPECT_DOUBLE_EQ(clustering_coefficient(path_graph(3)), 0.0);
    // Triangle with a pendant: 1 triangle, wedges 1 + 1 + 3 = 5.
    const Graph g(4, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}, {2, 3}});
    EXPECT_DOUBLE_EQ(clustering_coefficient(g), 3.0 / 5.0);
    EXPECT_EQ(count_triangles(g), 1u);
    EXPECT_EQ(count_wedges(g), 5u);
}

TEST(ClusteringCoefficient, UndefinedWithoutWedges) {
    try {
        clustering_coefficient(path_graph(2));
        FAIL() << "expected an error";
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("undefined clustering coefficient"), std::string::npos);
    }
}

TEST(ClusteringCoefficient, TriangleCountMatchesMatrixDiagonal) {
    const Graph g = random_test_graph(30, 0.3, 17);
    const auto t = triangle_motif_matrix(build_adjacency(g));
    double diag = 0.0;
    for (std::size_t v = 0; v < g.n_nodes(); ++v) diag += t.at(v, v);
    EXPECT_EQ(static_cast<double>(count_triangles(g)), diag / 3.0);
    EXPECT_EQ(count_triangles(g), enumerate_motif_instances(g, MotifSpec::triangle()).size());
}

TEST(OracleCheck, PassesAndReportsSemanticDivergence) {
    OracleCheckOptions opt;
    opt.n_graphs = 10;
    const auto r = oracle_check(opt);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.mismatch_count, 0u);
    EXPECT_EQ(r.graphs_checked, 10u);
    opt.semantics = MotifSemantics::kEdgeInInstance;
    const auto e = oracle_check(opt);
    EXPECT_TRUE(e.passed);
    EXPECT_GT(e.intentional_wedge_divergence, 0u);
}
