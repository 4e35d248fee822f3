#pragma once

#include "mgcmn/dataset.hpp"
#include "mgcmn/dense_matrix.hpp"
#include "mgcmn/graph.hpp"
#include "mgcmn/motif.hpp"
#include "mgcmn/neural.hpp"
#include "mgcmn/parallel.hpp"
#include "mgcmn/sparse_matrix.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgcmn {

struct ModelConfig {
    /// Motif-GCN layers, then perceptron layers.
    std::size_t h1 = 2;
    std::size_t h2 = 1;
    std::size_t hidden_dim = 16;
    MixRecipe recipe{{{MatrixSource::kEdge, 1.0}}};
    MotifSemantics semantics = MotifSemantics::kCoOccurrence;
    OptimizerConfig optimizer;
    std::size_t max_epochs = 200;
    /// Epochs without a validation-loss improvement before stopping.
    std::size_t patience = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (h1 < 1) throw std::invalid_argument("h1 must be at least 1");
        if (hidden_dim < 1) throw std::invalid_argument("hidden_dim must be at least 1");
        if (max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
        recipe.validate();
        optimizer.validate();
    }
};

struct ModelLayer {
    LayerRole role;
    Activation activation;
    LayerParams params;
};

struct Model {
    ModelConfig config;
    SparseMatrix mixed_matrix;
    std::vector<double> mix_weights;
    std::vector<ModelLayer> layers;

    /// T, hidden..., L.
    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> d;
        if (layers.empty()) return d;
        d.push_back(layers.front().params.in_dim());
        for (const auto& l : layers) d.push_back(l.params.out_dim());
        return d;
    }
};

/// Layer stack over a prebuilt convolution matrix: h1 GCN layers then h2 MLP
/// layers, ReLU everywhere except a softmax on the very last layer (which is
/// a GCN layer when h2 = 0).
inline Model build_model(const ModelConfig& config, std::size_t feature_dim, std::size_t n_classes,
                         SparseMatrix mixed_matrix, std::vector<double> mix_weights = {}) {
    config.validate();
    if (feature_dim == 0) throw std::invalid_argument("build_model: feature dimension is zero");
    if (n_classes == 0) throw std::invalid_argument("build_model: class count is zero");
    Model model;
    model.config = config;
    model.mixed_matrix = std::move(mixed_matrix);
    model.mix_weights = std::move(mix_weights);
    const std::size_t total = config.h1 + config.h2;
    std::size_t in = feature_dim;
    for (std::size_t k = 0; k < total; ++k) {
        const bool last = k + 1 == total;
        const std::size_t out = last ? n_classes : config.hidden_dim;
        model.layers.push_back({k < config.h1 ? LayerRole::kGcn : LayerRole::kMlp,
                                last ? Activation::kSoftmax : Activation::kRelu,
                                LayerParams(glorot_init(in, out, mix_seed(config.seed, k)))});
        in = out;
    }
    return model;
}

inline Model build_model(const ModelConfig& config, const Graph& graph) {
    config.validate();
    if (graph.feature_dim() == 0) throw std::invalid_argument("build_model: graph has no features");
    auto mix = mix_matrices(config.recipe, graph, {config.semantics, 1});
    return build_model(config, graph.feature_dim(), static_cast<std::size_t>(graph.n_classes()),
                       std::move(mix.matrix), std::move(mix.weights));
}

struct ForwardTape {
    std::vector<LayerTape> layers;
};

/// Z = h^{H1+H2}. Dropout on every layer input when `training` and a
/// generator is supplied.
inline DenseMatrix forward(const Model& model, const DenseMatrix& x, bool training, Rng* dropout_rng = nullptr,
                           ForwardTape* tape = nullptr) {
    if (x.rows() != model.mixed_matrix.n())
        throw std::invalid_argument("forward: feature rows (" + std::to_string(x.rows()) + ") != matrix size (" +
                                    std::to_string(model.mixed_matrix.n()) + ")");
    const bool use_dropout = training && dropout_rng && model.config.optimizer.dropout_rate > 0.0;
    if (tape) tape->layers.assign(model.layers.size(), {});
    DenseMatrix h = x;
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        const auto& layer = model.layers[k];
        DenseMatrix scale;
        DenseMatrix input = use_dropout
                                ? dropout_forward(h, model.config.optimizer.dropout_rate, *dropout_rng, true, &scale)
                                : std::move(h);
        const SparseMatrix* s = layer.role == LayerRole::kGcn ? &model.mixed_matrix : nullptr;
        LayerTape* lt = tape ? &tape->layers[k] : nullptr;
        h = layer_forward(s, input, layer.params, layer.activation, lt);
        if (lt) lt->dropout_scale = std::move(scale);
    }
    return h;
}

/// Weight gradients from dL/d(pre-activation of the last layer).
inline std::vector<DenseMatrix> backward(const Model& model, const ForwardTape& tape, DenseMatrix grad_pre) {
    if (tape.layers.size() != model.layers.size()) throw std::invalid_argument("backward: tape does not match model");
    std::vector<DenseMatrix> grads(model.layers.size());
    for (std::size_t k = model.layers.size(); k-- > 0;) {
        const auto& layer = model.layers[k];
        const auto& lt = tape.layers[k];
        if (grad_pre.rows() != lt.pre_activation.rows() || grad_pre.cols() != lt.pre_activation.cols())
            throw std::invalid_argument("backward: gradient shape does not match layer " + std::to_string(k));
        const SparseMatrix* s = layer.role == LayerRole::kGcn ? &model.mixed_matrix : nullptr;
        auto g = layer_backward(s, layer.params, lt, grad_pre, k > 0);
        grads[k] = std::move(g.weight);
        if (k > 0) grad_pre = activation_backward(model.layers[k - 1].activation, tape.layers[k - 1], g.input);
    }
    return grads;
}

/// Weight gradients from dL/dZ for an arbitrary loss on the model output.
inline std::vector<DenseMatrix> backward_from_output(const Model& model, const ForwardTape& tape,
                                                     const DenseMatrix& grad_output) {
    return backward(model, tape, activation_backward(model.layers.back().activation, tape.layers.back(), grad_output));
}

inline double l2_penalty(const Model& model) {
    if (model.layers.empty()) return 0.0;
    double sq = 0.0;
    for (double v : model.layers.front().params.w.values()) sq += v * v;
    return 0.5 * model.config.optimizer.weight_decay * sq;
}

/// Training objective without dropout: cross-entropy + first-layer L2.
inline double objective(const Model& model, const DenseMatrix& x, std::span<const int> labels,
                        std::span<const NodeId> mask) {
    return cross_entropy_loss(forward(model, x, false), labels, mask) + l2_penalty(model);
}

struct GradientResult {
    double data_loss = 0.0;
    double objective = 0.0;
    std::vector<DenseMatrix> grads;
};

/// Loss and exact gradients of the objective. Dropout is active iff a
/// generator is passed.
inline GradientResult compute_gradients(const Model& model, const DenseMatrix& x, std::span<const int> labels,
                                        std::span<const NodeId> mask, Rng* dropout_rng = nullptr) {
    ForwardTape tape;
    const DenseMatrix z = forward(model, x, dropout_rng != nullptr, dropout_rng, &tape);
    GradientResult r;
    r.data_loss = cross_entropy_loss(z, labels, mask);
    r.objective = r.data_loss + l2_penalty(model);
    if (model.layers.back().activation == Activation::kSoftmax) {
        r.grads = backward(model, tape, softmax_cross_entropy_grad(z, labels, mask));
    } else {
        // Generic path: dL/dZ of the floored log-likelihood.
        DenseMatrix gz(z.rows(), z.cols());
        for (NodeId v : mask) {
            const auto y = static_cast<std::size_t>(labels[v]);
            if (z(v, y) > kProbabilityFloor) gz(v, y) = -1.0 / (z(v, y) * static_cast<double>(mask.size()));
        }
        r.grads = backward_from_output(model, tape, gz);
    }
    const double wd = model.config.optimizer.weight_decay;
    if (wd > 0.0) {
        auto& g0 = r.grads.front().values();
        const auto& w0 = model.layers.front().params.w.values();
        for (std::size_t i = 0; i < g0.size(); ++i) g0[i] += wd * w0[i];
    }
    return r;
}

inline std::size_t argmax_row(const DenseMatrix& z, std::size_t r) {
    auto row = z.row(r);
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

/// Fraction of masked nodes whose argmax prediction matches the label.
inline double accuracy(const DenseMatrix& z, std::span<const int> labels, std::span<const NodeId> mask) {
    detail::check_mask(z, labels, mask);
    std::size_t hit = 0;
    for (NodeId v : mask)
        if (argmax_row(z, v) == static_cast<std::size_t>(labels[v])) ++hit;
    return static_cast<double>(hit) / static_cast<double>(mask.size());
}

inline double evaluate(const Model& model, const DenseMatrix& x, std::span<const int> labels,
                       std::span<const NodeId> mask) {
    return accuracy(forward(model, x, false), labels, mask);
}

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();
    double val_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::quiet_NaN();
    double best_val_accuracy = std::numeric_limits<double>::quiet_NaN();
    double test_accuracy = std::numeric_limits<double>::quiet_NaN();
    bool early_stopped = false;
    double seconds = 0.0;
    std::vector<std::string> warnings;
};

struct TrainResult {
    Model model;
    TrainReport report;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t epoch, const std::string& what)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// Full-batch Adam with early stopping on validation loss. Restores the
/// weights of the best validation epoch (the last epoch when there is no
/// validation split). Deterministic for a given seed.
inline TrainResult train(const ModelConfig& config, const Graph& graph, const Splits& splits,
                         const MixResult* prebuilt = nullptr) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    splits.validate(graph.n_nodes());
    if (graph.labels().size() != graph.n_nodes()) throw std::invalid_argument("train: graph has no labels");

    TrainResult result;
    if (prebuilt) {
        result.model = build_model(config, graph.feature_dim(), static_cast<std::size_t>(graph.n_classes()),
                                   prebuilt->matrix, prebuilt->weights);
        result.report.warnings = prebuilt->warnings;
    } else {
        auto mix = mix_matrices(config.recipe, graph, {config.semantics, 1});
        result.report.warnings = mix.warnings;
        result.model = build_model(config, graph.feature_dim(), static_cast<std::size_t>(graph.n_classes()),
                                   std::move(mix.matrix), std::move(mix.weights));
    }
    Model& model = result.model;
    auto& report = result.report;
    const DenseMatrix& x = graph.features();
    const auto& labels = graph.labels();
    const bool has_val = !splits.validation.empty();

    Rng dropout_rng(mix_seed(config.seed, 0xd809));
    std::vector<ModelLayer> best_layers = model.layers;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        auto g = compute_gradients(model, x, labels, splits.train, &dropout_rng);
        if (!std::isfinite(g.objective)) throw TrainingDiverged(epoch, "non-finite training loss");
        for (std::size_t k = 0; k < model.layers.size(); ++k) adam_step(model.layers[k].params, g.grads[k], config.optimizer, epoch);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = g.data_loss;
        if (has_val) {
            const DenseMatrix z = forward(model, x, false);
            rec.val_loss = cross_entropy_loss(z, labels, splits.validation);
            rec.val_accuracy = accuracy(z, labels, splits.validation);
            if (!std::isfinite(rec.val_loss)) throw TrainingDiverged(epoch, "non-finite validation loss");
        }
        report.epochs.push_back(rec);

        if (!has_val || rec.val_loss < best_val) {
            best_val = has_val ? rec.val_loss : best_val;
            best_layers = model.layers;
            report.best_epoch = epoch;
            report.best_val_loss = rec.val_loss;
            report.best_val_accuracy = rec.val_accuracy;
            since_best = 0;
        } else if (++since_best >= config.patience && config.patience > 0) {
            report.early_stopped = true;
            break;
        }
    }
    model.layers = std::move(best_layers);
    if (!splits.test.empty()) report.test_accuracy = evaluate(model, x, labels, splits.test);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

struct ProtocolResult {
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
    double stddev = 0.0;
    std::vector<double> accuracies;
    std::vector<std::size_t> best_epochs;
    std::vector<std::string> warnings;
};

inline ProtocolResult summarize_runs(std::vector<double> accuracies) {
    ProtocolResult r;
    if (accuracies.empty()) return r;
    r.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(accuracies.size());
    r.max = *std::max_element(accuracies.begin(), accuracies.end());
    r.min = *std::min_element(accuracies.begin(), accuracies.end());
    double var = 0.0;
    for (double a : accuracies) var += (a - r.mean) * (a - r.mean);
    r.stddev = accuracies.size() > 1 ? std::sqrt(var / static_cast<double>(accuracies.size() - 1)) : 0.0;
    r.accuracies = std::move(accuracies);
    return r;
}

/// Trains `n_runs` models with seeds seed, seed+1, ... and summarizes test
/// accuracy. Runs are independent and merged by run index.
inline ProtocolResult run_protocol(const ModelConfig& config, const Graph& graph, const Splits& splits,
                                   std::size_t n_runs, unsigned threads = 1) {
    if (n_runs < 1) throw std::invalid_argument("run_protocol: n_runs must be at least 1");
    if (splits.test.empty()) throw std::invalid_argument("run_protocol: test split is empty");
    config.validate();
    const auto mix = mix_matrices(config.recipe, graph, {config.semantics, threads});
    std::vector<double> acc(n_runs);
    std::vector<std::size_t> best(n_runs);
    parallel_for(n_runs, threads, [&](std::size_t i, unsigned) {
        ModelConfig c = config;
        c.seed = config.seed + i;
        auto r = train(c, graph, splits, &mix);
        acc[i] = r.report.test_accuracy;
        best[i] = r.report.best_epoch;
    });
    auto out = summarize_runs(std::move(acc));
    out.best_epochs = std::move(best);
    out.warnings = mix.warnings;
    return out;
}

struct GridRow {
    MixRecipe recipe;
    std::vector<double> weights;
    std::vector<double> val_accuracies;
    double mean_val_accuracy = 0.0;
    std::vector<std::string> warnings;
};

struct GridResult {
    std::size_t best_index = 0;
    MixRecipe best;
    std::vector<GridRow> rows;
};

/// Scores each recipe by mean best-epoch validation accuracy over seeds
/// seed..seed+n_seeds-1. Ties go to the earlier recipe. Test labels are
/// never consulted.
inline GridResult grid_search(const ModelConfig& base, const Graph& graph, const Splits& splits,
                              std::span<const MixRecipe> grid, std::size_t n_seeds = 5, unsigned threads = 1) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
    if (splits.validation.empty()) throw std::invalid_argument("grid_search: validation split is empty");
    if (n_seeds < 1) throw std::invalid_argument("grid_search: need at least one seed");
    GridResult result;
    for (const auto& recipe : grid) {
        ModelConfig c = base;
        c.recipe = recipe;
        c.validate();
        const auto mix = mix_matrices(recipe, graph, {c.semantics, threads});
        GridRow row;
        row.recipe = recipe;
        row.weights = mix.weights;
        row.warnings = mix.warnings;
        row.val_accuracies.assign(n_seeds, 0.0);
        parallel_for(n_seeds, threads, [&](std::size_t i, unsigned) {
            ModelConfig ci = c;
            ci.seed = base.seed + i;
            Splits no_test = splits;
            no_test.test.clear();
            row.val_accuracies[i] = train(ci, graph, no_test, &mix).report.best_val_accuracy;
        });
        row.mean_val_accuracy = std::accumulate(row.val_accuracies.begin(), row.val_accuracies.end(), 0.0) /
                                static_cast<double>(n_seeds);
        result.rows.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < result.rows.size(); ++i)
        if (result.rows[i].mean_val_accuracy > result.rows[result.best_index].mean_val_accuracy) result.best_index = i;
    result.best = result.rows[result.best_index].recipe;
    return result;
}

}  // namespace mgcmn
