// Minimal feed-forward softmax classifier: exact forward/backward passes and
// plain mini-batch SGD. Networks and datasets are immutable values after
// construction; forward() and grad_nll() are pure.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "labo/math.hpp"
#include "labo/rng.hpp"

namespace labo {

enum class Activation { Tanh, Relu };

inline std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw std::invalid_argument("unknown activation: " + s);
}

/// Layer sizes from input dimension through hidden widths to class count.
/// Hidden layers use `activation`; the output layer is always softmax.
struct ArchSpec {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::Tanh;

    void validate() const {
        if (layer_sizes.size() < 2) throw std::invalid_argument("arch needs at least input and output sizes");
        for (std::size_t s : layer_sizes) {
            if (s == 0) throw std::invalid_argument("arch layer sizes must be positive");
        }
    }

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t class_count() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return layer_sizes.size() - 1; }

    bool operator==(const ArchSpec&) const = default;
};

/// Per-layer (weight matrix, bias vector) stack. Shared container for
/// weights themselves, gradients, and per-parameter diagonal quantities.
struct ParamTensors {
    std::vector<Matrix> weights;              // fan_out x fan_in, row-major
    std::vector<std::vector<double>> biases;  // fan_out

    std::size_t layer_count() const { return weights.size(); }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].data.size() + biases[l].size();
        return n;
    }

    bool same_shape(const ParamTensors& o) const {
        if (weights.size() != o.weights.size()) return false;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (!weights[l].same_shape(o.weights[l]) || biases[l].size() != o.biases[l].size()) return false;
        }
        return true;
    }

    void fill(double v) {
        for (auto& w : weights) std::fill(w.data.begin(), w.data.end(), v);
        for (auto& b : biases) std::fill(b.begin(), b.end(), v);
    }

    bool finite() const {
        for (const auto& w : weights)
            if (!all_finite(w.data)) return false;
        for (const auto& b : biases)
            if (!all_finite(b)) return false;
        return true;
    }

    static ParamTensors zeros(const ArchSpec& arch) {
        arch.validate();
        ParamTensors t;
        for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
            t.weights.emplace_back(arch.layer_sizes[l + 1], arch.layer_sizes[l]);
            t.biases.emplace_back(arch.layer_sizes[l + 1], 0.0);
        }
        return t;
    }
};

using Gradient = ParamTensors;

struct Network {
    ArchSpec arch;
    ParamTensors params;

    std::size_t layer_count() const { return params.layer_count(); }
    std::size_t param_count() const { return params.param_count(); }
};

struct Dataset {
    Matrix inputs;            // n x d
    std::vector<int> labels;  // class indices in [0, K)

    std::size_t size() const { return inputs.rows; }
    std::size_t dim() const { return inputs.cols; }

    void validate(std::size_t class_count = 0) const {
        if (inputs.rows == 0) throw std::invalid_argument("dataset is empty");
        if (inputs.rows != labels.size()) throw std::invalid_argument("dataset row/label count mismatch");
        for (int y : labels) {
            if (y < 0 || (class_count > 0 && static_cast<std::size_t>(y) >= class_count))
                throw std::invalid_argument("dataset label out of range");
        }
    }
};

/// Weights ~ N(0, 1/fan_in), biases zero; fully determined by seed.
inline Network init_network(const ArchSpec& arch, std::uint64_t seed) {
    arch.validate();
    Network net{arch, ParamTensors::zeros(arch)};
    auto eng = rng::make_engine(seed);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(net.params.weights[l].cols));
        for (double& w : net.params.weights[l].data) w = scale * rng::normal01(eng);
    }
    return net;
}

namespace detail {

// Activations per layer for one input; layer 0 holds the input itself.
struct ForwardTrace {
    std::vector<std::vector<double>> acts;
};

inline void apply_hidden_activation(std::vector<double>& z, Activation a) {
    if (a == Activation::Tanh) {
        for (double& v : z) v = std::tanh(v);
    } else {
        for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
}

inline std::vector<double> affine(const Matrix& w, const std::vector<double>& b, const std::vector<double>& x) {
    std::vector<double> z(w.rows);
    for (std::size_t j = 0; j < w.rows; ++j) z[j] = b[j] + dot(w.row(j), x.data(), w.cols);
    return z;
}

inline ForwardTrace forward_trace(const Network& net, std::span<const double> x) {
    if (x.size() != net.arch.input_dim()) throw std::invalid_argument("forward: input dimension mismatch");
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("forward: non-finite input");
    }
    ForwardTrace t;
    t.acts.reserve(net.layer_count() + 1);
    t.acts.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto z = affine(net.params.weights[l], net.params.biases[l], t.acts.back());
        if (l + 1 < net.layer_count()) apply_hidden_activation(z, net.arch.activation);
        t.acts.push_back(std::move(z));
    }
    return t;
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
    const double lse = log_sum_exp(logits);
    std::vector<double> p(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) p[k] = std::exp(logits[k] - lse);
    return p;
}

}  // namespace detail

/// Class logits for one input (pre-softmax).
inline std::vector<double> forward_logits(const Network& net, std::span<const double> x) {
    return detail::forward_trace(net, x).acts.back();
}

/// Class probabilities for one input; entries >= 0 and sum to 1.
inline std::vector<double> forward(const Network& net, std::span<const double> x) {
    return detail::softmax(forward_logits(net, x));
}

/// Row-wise forward over a whole input matrix.
inline Matrix forward_batch(const Network& net, const Matrix& inputs) {
    Matrix probs(inputs.rows, net.arch.class_count());
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        auto p = forward(net, std::span<const double>(inputs.row(i), inputs.cols));
        std::copy(p.begin(), p.end(), probs.row(i));
    }
    return probs;
}

/// Negative log-likelihood of (x, y), computed via log-sum-exp.
inline double nll(const Network& net, std::span<const double> x, int y) {
    const auto logits = forward_logits(net, x);
    if (y < 0 || static_cast<std::size_t>(y) >= logits.size()) throw std::invalid_argument("nll: label out of range");
    return log_sum_exp(logits) - logits[static_cast<std::size_t>(y)];
}

namespace detail {

// Backprop for one sample, accumulated into `out` (must be zero-shaped like net).
inline void accumulate_grad_nll(const Network& net, std::span<const double> x, int y, Gradient& out) {
    if (y < 0 || static_cast<std::size_t>(y) >= net.arch.class_count())
        throw std::invalid_argument("grad_nll: label out of range");
    const auto trace = forward_trace(net, x);
    const std::size_t layers = net.layer_count();

    // dNLL/dlogits = softmax(logits) - onehot(y)
    std::vector<double> delta = softmax(trace.acts.back());
    delta[static_cast<std::size_t>(y)] -= 1.0;

    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& w = net.params.weights[l];
        const auto& a_in = trace.acts[l];
        for (std::size_t j = 0; j < w.rows; ++j) {
            const double dj = delta[j];
            double* grow = out.weights[l].row(j);
            for (std::size_t k = 0; k < w.cols; ++k) grow[k] += dj * a_in[k];
            out.biases[l][j] += dj;
        }
        if (l == 0) break;
        std::vector<double> prev(w.cols, 0.0);
        for (std::size_t j = 0; j < w.rows; ++j) {
            const double dj = delta[j];
            const double* wrow = w.row(j);
            for (std::size_t k = 0; k < w.cols; ++k) prev[k] += dj * wrow[k];
        }
        // chain through the previous layer's hidden activation
        if (net.arch.activation == Activation::Tanh) {
            for (std::size_t k = 0; k < prev.size(); ++k) prev[k] *= 1.0 - a_in[k] * a_in[k];
        } else {
            for (std::size_t k = 0; k < prev.size(); ++k) prev[k] = a_in[k] > 0.0 ? prev[k] : 0.0;
        }
        delta = std::move(prev);
    }
}

}  // namespace detail

/// Exact gradient of the negative log-likelihood of (x, y) w.r.t. all parameters.
inline Gradient grad_nll(const Network& net, std::span<const double> x, int y) {
    Gradient g = ParamTensors::zeros(net.arch);
    detail::accumulate_grad_nll(net, x, y, g);
    return g;
}

/// Mean NLL over a dataset.
inline double mean_nll(const Network& net, const Dataset& data) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        s += nll(net, std::span<const double>(data.inputs.row(i), data.inputs.cols), data.labels[i]);
    return s / static_cast<double>(data.size());
}

/// Fraction of argmax-correct predictions, in percent. Ties break to the
/// lowest class index.
inline double accuracy_pct(const Network& net, const Dataset& data) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = forward(net, std::span<const double>(data.inputs.row(i), data.inputs.cols));
        std::size_t arg = 0;
        for (std::size_t k = 1; k < p.size(); ++k)
            if (p[k] > p[arg]) arg = k;
        if (static_cast<int>(arg) == data.labels[i]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(data.size());
}

/// Plain mini-batch SGD on the mean NLL. Batch order is reshuffled every
/// epoch from the run seed; the whole run is determined by (net, data, seed).
/// lr = 0 leaves the weights bit-identical.
inline Network train_sgd(const Network& net, const Dataset& data, std::size_t epochs, double lr,
                         std::size_t batch_size, std::uint64_t seed) {
    data.validate(net.arch.class_count());
    if (data.dim() != net.arch.input_dim()) throw std::invalid_argument("train_sgd: data dimension mismatch");
    if (epochs < 1) throw std::invalid_argument("train_sgd: epochs must be >= 1");
    if (lr < 0.0) throw std::invalid_argument("train_sgd: negative learning rate");
    if (batch_size < 1 || batch_size > data.size()) throw std::invalid_argument("train_sgd: bad batch size");

    Network out = net;
    auto eng = rng::make_engine(seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Gradient batch_grad = ParamTensors::zeros(net.arch);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng::shuffle(order, eng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, order.size());
            batch_grad.fill(0.0);
            for (std::size_t idx = start; idx < end; ++idx) {
                const std::size_t i = order[idx];
                const std::span<const double> x(data.inputs.row(i), data.inputs.cols);
                epoch_loss += nll(out, x, data.labels[i]);
                detail::accumulate_grad_nll(out, x, data.labels[i], batch_grad);
            }
            const double step = lr / static_cast<double>(end - start);
            for (std::size_t l = 0; l < out.layer_count(); ++l) {
                double* w = out.params.weights[l].data.data();
                const double* g = batch_grad.weights[l].data.data();
                for (std::size_t k = 0; k < out.params.weights[l].data.size(); ++k) w[k] -= step * g[k];
                for (std::size_t k = 0; k < out.params.biases[l].size(); ++k)
                    out.params.biases[l][k] -= step * batch_grad.biases[l][k];
            }
        }
        if (!std::isfinite(epoch_loss)) {
            std::ostringstream msg;
            msg << "train_sgd: non-finite loss at epoch " << epoch;
            throw std::runtime_error(msg.str());
        }
    }
    return out;
}

}  // namespace labo
