#pragma once

// Central finite-difference check of the analytic gradients.

#include "mgcmn/dataset.hpp"
#include "mgcmn/model.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgcmn {

struct GradcheckOptions {
    double step = 1e-6;
    double tolerance = 1e-6;
    /// Gradients smaller than this are compared on an absolute scale.
    double magnitude_floor = 1e-3;
    /// Test hook: corrupt the analytic gradient to prove the check can fail.
    bool inject_wrong_gradient = false;
    /// Finite differences need a deterministic objective; requesting dropout
    /// is refused.
    bool force_dropout = false;
};

struct GradcheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_layer = 0, worst_row = 0, worst_col = 0;
    double worst_analytic = 0.0, worst_numeric = 0.0;
    std::size_t checked = 0;
    bool passed = true;
};

/// |a − n| / max(|a|, |n|, floor).
inline double gradient_relative_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares every weight gradient of the (dropout-free) training objective
/// with a central difference.
inline GradcheckResult gradcheck(const Model& model, const DenseMatrix& x, std::span<const int> labels,
                                 std::span<const NodeId> mask, const GradcheckOptions& opt = {}) {
    if (opt.force_dropout)
        throw std::invalid_argument(
            "gradcheck refuses dropout: it resamples the mask on every evaluation, so finite differences do not "
            "measure the gradient; run with dropout off");
    if (!(opt.step > 0.0)) throw std::invalid_argument("gradcheck step must be positive");
    auto grads = compute_gradients(model, x, labels, mask, nullptr).grads;
    if (opt.inject_wrong_gradient) grads.front().values().front() += 1e-2;

    GradcheckResult res;
    Model probe = model;
    for (std::size_t k = 0; k < probe.layers.size(); ++k) {
        auto& w = probe.layers[k].params.w;
        for (std::size_t i = 0; i < w.rows(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j) {
                const double orig = w(i, j);
                w(i, j) = orig + opt.step;
                const double up = objective(probe, x, labels, mask);
                w(i, j) = orig - opt.step;
                const double down = objective(probe, x, labels, mask);
                w(i, j) = orig;
                const double numeric = (up - down) / (2.0 * opt.step);
                const double analytic = grads[k](i, j);
                const double err = gradient_relative_error(analytic, numeric, opt.magnitude_floor);
                ++res.checked;
                if (err > res.max_relative_error || res.checked == 1) {
                    res.max_relative_error = err;
                    res.worst_layer = k;
                    res.worst_row = i;
                    res.worst_col = j;
                    res.worst_analytic = analytic;
                    res.worst_numeric = numeric;
                }
            }
    }
    res.passed = res.max_relative_error < opt.tolerance;
    return res;
}

/// Bundled 12-node, 3-class graph with triangles, wedges and a pendant node
/// (mirrored on disk under data/fixtures/gradcheck12).
inline Dataset gradcheck_fixture() {
    const std::vector<Edge> edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {3, 5}, {4, 5}, {5, 6},
                                     {6, 7}, {7, 8}, {6, 8}, {8, 9}, {9, 10}, {2, 9}, {1, 10}, {10, 11}};
    const std::size_t n = 12, dim = 5;
    DenseMatrix x(n, dim);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t f = 0; f < dim; ++f) x(v, f) = static_cast<double>((v * 7 + f * 3) % 5) / 4.0;
    std::vector<int> labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(v % 3);
    Dataset ds;
    ds.name = "gradcheck12";
    ds.graph = Graph(n, edges, std::move(x), std::move(labels), 3);
    ds.raw_edge_records = edges.size();
    ds.class_names = {"0", "1", "2"};
    return ds;
}

struct GradcheckShape {
    std::size_t h1, h2;
};

/// The four architecture shapes used by the experiment configs.
inline constexpr std::array<GradcheckShape, 4> kGradcheckShapes{{{1, 0}, {1, 1}, {2, 0}, {2, 1}}};

struct GradcheckSuiteRow {
    GradcheckShape shape;
    GradcheckResult result;
};

struct GradcheckSuiteResult {
    std::vector<GradcheckSuiteRow> rows;
    double max_relative_error = 0.0;
    double seconds = 0.0;
    bool passed = true;
};

/// Runs gradcheck on every shape over `ds`, all nodes labeled in the mask.
inline GradcheckSuiteResult gradcheck_suite(const Dataset& ds, ModelConfig base, const GradcheckOptions& opt = {}) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<NodeId> mask;
    for (NodeId v = 0; v < ds.graph.n_nodes(); ++v)
        if (ds.graph.labels()[v] != kUnlabeled) mask.push_back(v);
    const auto mix = mix_matrices(base.recipe, ds.graph, {base.semantics, 1});
    GradcheckSuiteResult out;
    for (const auto& shape : kGradcheckShapes) {
        ModelConfig c = base;
        c.h1 = shape.h1;
        c.h2 = shape.h2;
        const Model m = build_model(c, ds.graph.feature_dim(), static_cast<std::size_t>(ds.graph.n_classes()), mix.matrix,
                                    mix.weights);
        auto r = gradcheck(m, ds.graph.features(), ds.graph.labels(), mask, opt);
        out.max_relative_error = std::max(out.max_relative_error, r.max_relative_error);
        out.passed = out.passed && r.passed;
        out.rows.push_back({shape, r});
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

}  // namespace mgcmn
