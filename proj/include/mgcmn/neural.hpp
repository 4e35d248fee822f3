#pragma once

#include "mgcmn/dense_matrix.hpp"
#include "mgcmn/graph.hpp"
#include "mgcmn/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mgcmn {

/// mt19937_64 with a portable double conversion (the engine output is fixed
/// by the standard, std::uniform_real_distribution is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Fisher-Yates with the portable generator.
template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
}

enum class Activation { kNone, kRelu, kSoftmax };
enum class LayerRole { kGcn, kMlp };

inline std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::kNone: return "none";
        case Activation::kRelu: return "relu";
        case Activation::kSoftmax: return "softmax";
    }
    return "?";
}
inline std::string_view to_string(LayerRole r) { return r == LayerRole::kGcn ? "gcn" : "mlp"; }

/// Weight matrix (in_dim × out_dim) and its Adam moments. No bias.
struct LayerParams {
    DenseMatrix w;
    DenseMatrix adam_m;
    DenseMatrix adam_v;

    LayerParams() = default;
    explicit LayerParams(DenseMatrix weights)
        : w(std::move(weights)), adam_m(w.rows(), w.cols()), adam_v(w.rows(), w.cols()) {}

    std::size_t in_dim() const { return w.rows(); }
    std::size_t out_dim() const { return w.cols(); }
};

struct OptimizerConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// L2 strength on the first layer's weights (loss term weight_decay/2·‖W‖²).
    double weight_decay = 5e-4;
    double dropout_rate = 0.5;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("dropout_rate must be in [0,1)");
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
            throw std::invalid_argument("Adam betas must be in [0,1)");
        if (!(epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
        if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be nonnegative");
    }
};

/// Uniform in ±sqrt(6 / (in_dim + out_dim)).
inline DenseMatrix glorot_init(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed) {
    if (in_dim == 0 || out_dim == 0) throw std::invalid_argument("glorot_init: dimensions must be at least 1");
    const double s = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    Rng rng(seed);
    DenseMatrix w(in_dim, out_dim);
    for (double& v : w.values()) v = rng.uniform(-s, s);
    return w;
}

inline DenseMatrix relu(DenseMatrix m) {
    for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
    return m;
}

/// Row-wise softmax, max-shifted.
inline DenseMatrix softmax_rows(DenseMatrix m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        if (r.empty()) continue;
        const double top = *std::max_element(r.begin(), r.end());
        double sum = 0.0;
        for (double& v : r) {
            v = std::exp(v - top);
            sum += v;
        }
        for (double& v : r) v /= sum;
    }
    return m;
}

inline DenseMatrix apply_activation(Activation a, DenseMatrix m) {
    switch (a) {
        case Activation::kNone: return m;
        case Activation::kRelu: return relu(std::move(m));
        case Activation::kSoftmax: return softmax_rows(std::move(m));
    }
    return m;
}

/// Intermediates a layer keeps for its backward pass.
struct LayerTape {
    DenseMatrix input;          // after dropout
    DenseMatrix dropout_scale;  // empty when no dropout was applied
    bool aggregate_first = true;
    DenseMatrix intermediate;   // S·input if aggregate_first, else input·W
    DenseMatrix pre_activation;
    DenseMatrix output;
};

/// Inverted dropout. In training each entry is zeroed with probability
/// `rate` and survivors scaled by 1/(1-rate); otherwise the identity.
/// `scale` receives the per-entry multiplier (left empty for the identity).
inline DenseMatrix dropout_forward(const DenseMatrix& h, double rate, Rng& rng, bool training,
                                   DenseMatrix* scale = nullptr) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0,1)");
    if (scale) *scale = DenseMatrix();
    if (!training || rate == 0.0) return h;
    const double keep = 1.0 / (1.0 - rate);
    DenseMatrix out = h;
    DenseMatrix mask(h.rows(), h.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double m = rng.uniform() < rate ? 0.0 : keep;
        mask.values()[i] = m;
        out.values()[i] *= m;
    }
    if (scale) *scale = std::move(mask);
    return out;
}

namespace detail {
inline void check_layer_shapes(const SparseMatrix* s, const DenseMatrix& h, const LayerParams& p) {
    if (s && s->n() != h.rows())
        throw std::invalid_argument("layer: aggregation matrix is " + std::to_string(s->n()) + "x" +
                                    std::to_string(s->n()) + " but input has " + std::to_string(h.rows()) + " rows");
    if (h.cols() != p.in_dim())
        throw std::invalid_argument("layer: input has " + std::to_string(h.cols()) + " columns but W expects " +
                                    std::to_string(p.in_dim()));
}
}  // namespace detail

/// activation(S·H·W) for a GCN layer (s != nullptr) or activation(H·W) for an
/// MLP layer. The cheaper association order is picked from the dimensions.
inline DenseMatrix layer_forward(const SparseMatrix* s, const DenseMatrix& h, const LayerParams& p,
                                 Activation act, LayerTape* tape = nullptr) {
    detail::check_layer_shapes(s, h, p);
    DenseMatrix pre;
    DenseMatrix intermediate;
    bool aggregate_first = true;
    if (!s) {
        pre = matmul(h, p.w);
    } else if (p.in_dim() > p.out_dim()) {
        aggregate_first = false;
        intermediate = matmul(h, p.w);
        pre = spmm(*s, intermediate);
    } else {
        intermediate = spmm(*s, h);
        pre = matmul(intermediate, p.w);
    }
    DenseMatrix out = apply_activation(act, pre);
    if (tape) {
        tape->input = h;
        tape->aggregate_first = aggregate_first;
        tape->intermediate = std::move(intermediate);
        tape->pre_activation = std::move(pre);
        tape->output = out;
    }
    return out;
}

inline DenseMatrix gcn_layer_forward(const SparseMatrix& s, const DenseMatrix& h, const LayerParams& p,
                                     Activation act) {
    return layer_forward(&s, h, p, act);
}

inline DenseMatrix mlp_layer_forward(const DenseMatrix& h, const LayerParams& p, Activation act) {
    return layer_forward(nullptr, h, p, act);
}

/// dL/d(pre-activation) given dL/d(output).
inline DenseMatrix activation_backward(Activation act, const LayerTape& tape, const DenseMatrix& grad_output) {
    DenseMatrix g = grad_output;
    switch (act) {
        case Activation::kNone: break;
        case Activation::kRelu:
            for (std::size_t i = 0; i < g.size(); ++i)
                if (!(tape.pre_activation.values()[i] > 0.0)) g.values()[i] = 0.0;
            break;
        case Activation::kSoftmax:
            for (std::size_t r = 0; r < g.rows(); ++r) {
                auto z = tape.output.row(r);
                auto gr = g.row(r);
                double dot = 0.0;
                for (std::size_t j = 0; j < gr.size(); ++j) dot += gr[j] * z[j];
                for (std::size_t j = 0; j < gr.size(); ++j) gr[j] = z[j] * (gr[j] - dot);
            }
            break;
    }
    return g;
}

struct LayerGradients {
    DenseMatrix weight;
    DenseMatrix input;  // dL/d(input before dropout); empty unless requested
};

/// Backward through one layer from dL/d(pre-activation). S is symmetric, so
/// Sᵀ·G = S·G.
inline LayerGradients layer_backward(const SparseMatrix* s, const LayerParams& p, const LayerTape& tape,
                                     const DenseMatrix& grad_pre, bool want_input_grad) {
    LayerGradients out;
    DenseMatrix grad_input;
    if (!s) {
        out.weight = matmul_tn(tape.input, grad_pre);
        if (want_input_grad) grad_input = matmul_nt(grad_pre, p.w);
    } else if (tape.aggregate_first) {
        out.weight = matmul_tn(tape.intermediate, grad_pre);
        if (want_input_grad) grad_input = spmm(*s, matmul_nt(grad_pre, p.w));
    } else {
        DenseMatrix grad_proj = spmm(*s, grad_pre);
        out.weight = matmul_tn(tape.input, grad_proj);
        if (want_input_grad) grad_input = matmul_nt(grad_proj, p.w);
    }
    if (want_input_grad) {
        if (!tape.dropout_scale.empty()) grad_input = hadamard(grad_input, tape.dropout_scale);
        out.input = std::move(grad_input);
    }
    return out;
}

namespace detail {
inline void check_mask(const DenseMatrix& z, std::span<const int> labels, std::span<const NodeId> mask) {
    if (mask.empty()) throw std::invalid_argument("empty node mask");
    if (labels.size() != z.rows()) throw std::invalid_argument("label count does not match prediction rows");
    for (NodeId v : mask) {
        if (v >= z.rows()) throw std::out_of_range("mask node " + std::to_string(v) + " out of range");
        if (labels[v] < 0 || static_cast<std::size_t>(labels[v]) >= z.cols())
            throw std::invalid_argument("mask node " + std::to_string(v) + " has no valid label");
    }
}
}  // namespace detail

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean over masked nodes of −log Z[v, y_v], probabilities floored at 1e-12.
inline double cross_entropy_loss(const DenseMatrix& z, std::span<const int> labels, std::span<const NodeId> mask) {
    detail::check_mask(z, labels, mask);
    double total = 0.0;
    for (NodeId v : mask)
        total -= std::log(std::max(z(v, static_cast<std::size_t>(labels[v])), kProbabilityFloor));
    return total / static_cast<double>(mask.size());
}

/// Fused softmax + cross-entropy gradient w.r.t. the logits:
/// (Z − onehot(Y)) / |mask| on masked rows, zero elsewhere.
inline DenseMatrix softmax_cross_entropy_grad(const DenseMatrix& z, std::span<const int> labels,
                                              std::span<const NodeId> mask) {
    detail::check_mask(z, labels, mask);
    DenseMatrix g(z.rows(), z.cols());
    const double inv = 1.0 / static_cast<double>(mask.size());
    for (NodeId v : mask) {
        auto zr = z.row(v);
        auto gr = g.row(v);
        for (std::size_t j = 0; j < zr.size(); ++j) gr[j] += zr[j] * inv;
        gr[static_cast<std::size_t>(labels[v])] -= inv;
    }
    return g;
}

/// One Adam update with bias correction; `t` counts from 1.
inline void adam_step(LayerParams& p, const DenseMatrix& grad, const OptimizerConfig& cfg, std::size_t t) {
    if (t == 0) throw std::invalid_argument("adam_step: step counter starts at 1");
    if (grad.rows() != p.w.rows() || grad.cols() != p.w.cols())
        throw std::invalid_argument("adam_step: gradient shape does not match weights");
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    auto& w = p.w.values();
    auto& m = p.adam_m.values();
    auto& v = p.adam_v.values();
    const auto& g = grad.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        w[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace mgcmn
