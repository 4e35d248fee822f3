#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace mgcmn;
using namespace mgcmn::testing;

TEST(Rng, IsDeterministicAndInRange) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    Rng c(1);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(c.below(7), 7u);
}

TEST(Rng, MixSeedSeparatesStreams) {
    EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
    EXPECT_NE(mix_seed(0, 0), mix_seed(1, 0));
    EXPECT_EQ(mix_seed(5, 3), mix_seed(5, 3));
}

TEST(Glorot, BoundsAndDeterminism) {
    const auto w = glorot_init(10, 6, 3);
    const double s = std::sqrt(6.0 / 16.0);
    for (double v : w.values()) {
        EXPECT_LE(std::abs(v), s);
    }
    EXPECT_EQ(w, glorot_init(10, 6, 3));
    EXPECT_NE(w, glorot_init(10, 6, 4));
    EXPECT_THROW(glorot_init(0, 3, 1), std::invalid_argument);
}

TEST(Activations, ReluAndSoftmax) {
    DenseMatrix m(2, 3, {-1.0, 0.0, 2.0, 1000.0, 1000.0, 1000.0});
    const auto r = relu(m);
    EXPECT_EQ(r(0, 0), 0.0);
    EXPECT_EQ(r(0, 2), 2.0);
    const auto s = softmax_rows(m);
    for (std::size_t i = 0; i < 2; ++i) {
        double sum = 0.0;
        for (double v : s.row(i)) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-15);
    }
    EXPECT_NEAR(s(1, 0), 1.0 / 3.0, 1e-15);
    const double z = 1.0 + std::exp(1.0) + std::exp(3.0);
    EXPECT_NEAR(s(0, 0), 1.0 / z, 1e-15);
    EXPECT_NEAR(s(0, 2), std::exp(3.0) / z, 1e-15);
}

TEST(Dropout, IdentityOutsideTraining) {
    const auto h = random_dense(4, 5, 1);
    Rng rng(2);
    DenseMatrix scale;
    EXPECT_EQ(dropout_forward(h, 0.5, rng, false, &scale), h);
    EXPECT_TRUE(scale.empty());
    EXPECT_EQ(dropout_forward(h, 0.0, rng, true), h);
    EXPECT_THROW(dropout_forward(h, 1.0, rng, true), std::invalid_argument);
}

TEST(Dropout, InvertedScalingPreservesMean) {
    DenseMatrix h(200, 100);
    for (double& v : h.values()) v = 1.0;
    Rng rng(3);
    DenseMatrix scale;
    const auto out = dropout_forward(h, 0.5, rng, true, &scale);
    std::size_t zeros = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = out.values()[i];
        EXPECT_TRUE(v == 0.0 || v == 2.0);
        EXPECT_EQ(v, scale.values()[i]);
        zeros += v == 0.0;
        sum += v;
    }
    EXPECT_NEAR(static_cast<double>(zeros) / 20000.0, 0.5, 0.02);
    EXPECT_NEAR(sum / 20000.0, 1.0, 0.04);
}

TEST(Layers, GcnLayerMatchesFormula) {
    const Graph g = path_graph(5);
    const auto s = normalize_symmetric(build_adjacency(g), true);
    const auto h = random_dense(5, 3, 4);
    // Both association orders: in < out and in > out.
    for (std::size_t out : {2u, 6u}) {
        const LayerParams p(glorot_init(3, out, 5));
        const auto expected = relu(naive_matmul(naive_matmul(s.to_dense(), h), p.w));
        EXPECT_LT(max_abs_diff(gcn_layer_forward(s, h, p, Activation::kRelu), expected), 1e-14);
    }
    const LayerParams p(glorot_init(3, 2, 6));
    EXPECT_LT(max_abs_diff(mlp_layer_forward(h, p, Activation::kNone), naive_matmul(h, p.w)), 1e-15);
    EXPECT_THROW(gcn_layer_forward(s, random_dense(4, 3, 1), p, Activation::kRelu), std::invalid_argument);
    EXPECT_THROW(mlp_layer_forward(random_dense(5, 2, 1), p, Activation::kRelu), std::invalid_argument);
}

TEST(Loss, CrossEntropyValuesAndGradient) {
    DenseMatrix z(3, 2, {0.25, 0.75, 0.5, 0.5, 1.0, 0.0});
    const std::vector<int> y{1, 0, 1};
    const std::vector<NodeId> mask{0, 1};
    EXPECT_NEAR(cross_entropy_loss(z, y, mask), -(std::log(0.75) + std::log(0.5)) / 2.0, 1e-15);
    // A zero probability is floored rather than producing infinity.
    const std::vector<NodeId> bad{2};
    EXPECT_NEAR(cross_entropy_loss(z, y, bad), -std::log(kProbabilityFloor), 1e-9);
    const auto g = softmax_cross_entropy_grad(z, y, mask);
    EXPECT_DOUBLE_EQ(g(0, 0), 0.125);
    EXPECT_DOUBLE_EQ(g(0, 1), -0.125);
    EXPECT_DOUBLE_EQ(g(1, 0), -0.25);
    EXPECT_EQ(g(2, 0), 0.0);
}

TEST(Loss, RejectsBadMasks) {
    DenseMatrix z(2, 2, {0.5, 0.5, 0.5, 0.5});
    const std::vector<int> y{0, kUnlabeled};
    EXPECT_THROW(cross_entropy_loss(z, y, std::vector<NodeId>{}), std::invalid_argument);
    EXPECT_THROW(cross_entropy_loss(z, y, std::vector<NodeId>{1}), std::invalid_argument);
    EXPECT_THROW(cross_entropy_loss(z, y, std::vector<NodeId>{2}), std::out_of_range);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    LayerParams p(DenseMatrix(1, 3, {1.0, 1.0, 1.0}));
    OptimizerConfig cfg;
    adam_step(p, DenseMatrix(1, 3, {2.0, -0.5, 0.0}), cfg, 1);
    // Bias-corrected first step is lr * g / (|g| + eps).
    EXPECT_NEAR(p.w(0, 0), 1.0 - 0.01, 1e-9);
    EXPECT_NEAR(p.w(0, 1), 1.0 + 0.01, 1e-9);
    EXPECT_EQ(p.w(0, 2), 1.0);
    EXPECT_THROW(adam_step(p, DenseMatrix(1, 3), cfg, 0), std::invalid_argument);
    EXPECT_THROW(adam_step(p, DenseMatrix(3, 1), cfg, 2), std::invalid_argument);
}

TEST(Adam, MatchesReferenceRecurrence) {
    LayerParams p(DenseMatrix(1, 1, {0.3}));
    OptimizerConfig cfg;
    double w = 0.3, m = 0.0, v = 0.0;
    for (std::size_t t = 1; t <= 5; ++t) {
        const double g = 0.1 * static_cast<double>(t) - 0.2;
        adam_step(p, DenseMatrix(1, 1, {g}), cfg, t);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1 - std::pow(0.9, static_cast<double>(t)));
        const double vh = v / (1 - std::pow(0.999, static_cast<double>(t)));
        w -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
        EXPECT_NEAR(p.w(0, 0), w, 1e-15);
    }
}

TEST(Optimizer, ValidatesHyperparameters) {
    OptimizerConfig c;
    EXPECT_NO_THROW(c.validate());
    c.learning_rate = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.dropout_rate = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.weight_decay = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}
