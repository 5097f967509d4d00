// Gaussian weight posterior centered at the trained weights with the
// regularized precision diagonal, plus Monte Carlo predictive inference:
// average the softmax output over T weight samples.
#pragma once

#include <cmath>
#include <cstdint>

#include "labo/curvature.hpp"
#include "labo/nn.hpp"
#include "labo/rng.hpp"

namespace labo {

struct LaplacePosterior {
    Network mean;
    PrecisionDiag precision;
    std::vector<HyperGroup> groups;  // provenance of the regularization

    void validate() const {
        if (!mean.params.same_shape(precision.diag))
            throw std::invalid_argument("posterior mean/precision shape mismatch");
        for (const auto& w : precision.diag.weights)
            for (double v : w.data)
                if (!(v > 0.0)) throw std::invalid_argument("posterior precision must be positive");
        for (const auto& b : precision.diag.biases)
            for (double v : b)
                if (!(v > 0.0)) throw std::invalid_argument("posterior precision must be positive");
    }
};

struct PredictiveResult {
    Matrix probs;  // n_eval x K, rows in the probability simplex
    std::size_t t_samples = 0;
};

/// One weight realization: each parameter independently mean + eps/sqrt(prec).
inline Network sample_weights(const LaplacePosterior& post, rng::Engine& eng) {
    Network sample = post.mean;
    for (std::size_t l = 0; l < sample.layer_count(); ++l) {
        double* w = sample.params.weights[l].data.data();
        const double* p = post.precision.diag.weights[l].data.data();
        for (std::size_t k = 0; k < sample.params.weights[l].data.size(); ++k)
            w[k] += rng::normal01(eng) / std::sqrt(p[k]);
        auto& b = sample.params.biases[l];
        const auto& pb = post.precision.diag.biases[l];
        for (std::size_t k = 0; k < b.size(); ++k) b[k] += rng::normal01(eng) / std::sqrt(pb[k]);
    }
    return sample;
}

/// Monte Carlo predictive distribution: probs = (1/t) sum_t softmax(f_{W_t}(x)).
/// The same t weight realizations are shared across every input row. Sample t
/// draws from an independent sub-stream keyed by (seed, t), so the result is
/// reproducible regardless of evaluation order.
inline PredictiveResult predict_mc(const LaplacePosterior& post, const Matrix& inputs, std::size_t t,
                                   std::uint64_t seed) {
    if (t < 1) throw std::invalid_argument("predict_mc: need at least one sample");
    if (inputs.cols != post.mean.arch.input_dim()) throw std::invalid_argument("predict_mc: dimension mismatch");
    PredictiveResult res;
    res.probs = Matrix(inputs.rows, post.mean.arch.class_count());
    res.t_samples = t;
    for (std::size_t s = 0; s < t; ++s) {
        auto eng = rng::make_engine(seed, s);
        const Network draw = sample_weights(post, eng);
        for (std::size_t i = 0; i < inputs.rows; ++i) {
            const auto p = forward(draw, std::span<const double>(inputs.row(i), inputs.cols));
            double* out = res.probs.row(i);
            for (std::size_t k = 0; k < p.size(); ++k) out[k] += p[k];
        }
    }
    const double inv_t = 1.0 / static_cast<double>(t);
    for (double& v : res.probs.data) v *= inv_t;
    return res;
}

}  // namespace labo
