#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace mgcmn;
using namespace mgcmn::testing;

TEST(Graph, DeduplicatesAndDropsSelfLoops) {
    const std::vector<Edge> edges{{0, 1}, {1, 0}, {1, 2}, {2, 2}, {0, 1}};
    Graph g(3, edges);
    EXPECT_EQ(g.n_edges(), 2u);
    EXPECT_EQ(g.cleanup().duplicates_dropped, 2u);
    EXPECT_EQ(g.cleanup().self_loops_dropped, 1u);
    EXPECT_FALSE(g.has_edge(2, 2));
    EXPECT_TRUE(g.has_edge(1, 0));
}

TEST(Graph, SymmetrizationIsIdempotent) {
    const Graph g = make_graph(5, {{0, 1}, {1, 2}, {3, 4}, {2, 0}});
    const auto once = g.edge_list();
    const Graph again(5, once);
    EXPECT_EQ(again.edge_list(), once);
    std::vector<Edge> both = once;
    for (auto [u, v] : once) both.emplace_back(v, u);
    EXPECT_EQ(Graph(5, both).edge_list(), once);
}

TEST(Graph, DegreesAndNeighborsAreSorted) {
    const Graph g = make_graph(4, {{3, 0}, {0, 2}, {0, 1}});
    EXPECT_EQ(g.degree(0), 3u);
    EXPECT_EQ(degree(g, 3), 1u);
    const auto nb = g.neighbors(0);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    EXPECT_EQ(max_degree(g), 3u);
}

TEST(Graph, DegreeOfMissingNodeThrows) {
    const Graph g = make_graph(2, {{0, 1}});
    EXPECT_THROW(g.degree(2), std::out_of_range);
}

TEST(Graph, EmptyGraphHasZeroMaxDegree) {
    EXPECT_EQ(max_degree(Graph()), 0u);
    EXPECT_EQ(max_degree(Graph(4, std::vector<Edge>{})), 0u);
}

TEST(Graph, RejectsOutOfRangeEndpoint) {
    const std::vector<Edge> edges{{0, 5}};
    EXPECT_THROW(Graph(3, edges), std::out_of_range);
}

TEST(Graph, ValidatesAttributes) {
    const std::vector<Edge> edges{{0, 1}};
    EXPECT_THROW(Graph(2, edges, DenseMatrix(3, 1)), std::invalid_argument);
    EXPECT_THROW(Graph(2, edges, DenseMatrix(2, 1), {0}, 2), std::invalid_argument);
    EXPECT_THROW(Graph(2, edges, DenseMatrix(2, 1), {0, 2}, 2), std::invalid_argument);
    EXPECT_NO_THROW(Graph(2, edges, DenseMatrix(2, 1), {0, kUnlabeled}, 2));
}

TEST(Graph, AdjacencyIsBinarySymmetric) {
    const Graph g = complete_graph(4);
    const auto a = build_adjacency(g);
    EXPECT_EQ(a.nnz(), 12u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a.at(i, i), 0.0);
    EXPECT_EQ(a.at(1, 3), 1.0);
}

TEST(Graph, PermutationMovesAttributes) {
    DenseMatrix x(3, 1);
    x(0, 0) = 10;
    x(1, 0) = 11;
    x(2, 0) = 12;
    const std::vector<Edge> edges{{0, 1}};
    const Graph g(3, edges, x, {0, 1, 0}, 2);
    const std::vector<NodeId> perm{2, 0, 1};
    const Graph p = permute_graph(g, perm);
    EXPECT_TRUE(p.has_edge(2, 0));
    EXPECT_FALSE(p.has_edge(0, 1));
    EXPECT_EQ(p.features()(2, 0), 10);
    EXPECT_EQ(p.labels()[0], 1);
}
