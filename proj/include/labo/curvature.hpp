// Diagonal curvature of the loss surface: the dataset-averaged squared
// per-sample NLL gradient for every parameter, and the affine regularization
// scale * fisher + prior_precision that turns it into a positive precision
// diagonal under per-layer hyperparameter groups.
#pragma once

#include <set>
#include <vector>

#include "labo/nn.hpp"

namespace labo {

struct DiagonalCurvature {
    ParamTensors diag;  // entry j = mean_i grad_j(x_i, y_i)^2, always >= 0
};

/// One hyperparameter group: the layers it owns, the data-term multiplier
/// and the weight-prior precision. Groups must partition the layer set.
struct HyperGroup {
    std::vector<std::size_t> layer_indices;
    double n_value = 1.0;    // multiplier on the curvature term
    double tau_value = 1.0;  // added prior precision

    void validate() const {
        if (n_value <= 0.0 || tau_value <= 0.0)
            throw std::invalid_argument("hyper group values must be positive");
        if (layer_indices.empty()) throw std::invalid_argument("hyper group owns no layers");
    }
};

struct PrecisionDiag {
    ParamTensors diag;  // entry >= owning group's tau > 0, hence invertible
};

/// Dataset-average elementwise squared NLL gradient. Accumulation order is
/// the dataset order, so the result is deterministic and permutation of the
/// data only changes summation order within double rounding.
inline DiagonalCurvature diagonal_fisher(const Network& net, const Dataset& data) {
    data.validate(net.arch.class_count());
    if (data.dim() != net.arch.input_dim()) throw std::invalid_argument("diagonal_fisher: dimension mismatch");
    ParamTensors acc = ParamTensors::zeros(net.arch);
    Gradient g = ParamTensors::zeros(net.arch);
    for (std::size_t i = 0; i < data.size(); ++i) {
        g.fill(0.0);
        detail::accumulate_grad_nll(net, std::span<const double>(data.inputs.row(i), data.inputs.cols),
                                    data.labels[i], g);
        for (std::size_t l = 0; l < acc.layer_count(); ++l) {
            for (std::size_t k = 0; k < acc.weights[l].data.size(); ++k) {
                const double v = g.weights[l].data[k];
                acc.weights[l].data[k] += v * v;
            }
            for (std::size_t k = 0; k < acc.biases[l].size(); ++k) {
                const double v = g.biases[l][k];
                acc.biases[l][k] += v * v;
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (auto& w : acc.weights)
        for (double& v : w.data) v *= inv_n;
    for (auto& b : acc.biases)
        for (double& v : b) v *= inv_n;
    return DiagonalCurvature{std::move(acc)};
}

inline void validate_partition(const std::vector<HyperGroup>& groups, std::size_t layer_count) {
    std::set<std::size_t> seen;
    for (const auto& g : groups) {
        g.validate();
        for (std::size_t l : g.layer_indices) {
            if (l >= layer_count) throw std::invalid_argument("hyper group references unknown layer");
            if (!seen.insert(l).second) throw std::invalid_argument("hyper groups overlap");
        }
    }
    if (seen.size() != layer_count) throw std::invalid_argument("hyper groups do not cover all layers");
}

/// Per-entry n * fisher + tau with the owning group's values. Output entries
/// are >= tau of their group, so the precision is strictly positive.
inline PrecisionDiag regularize(const DiagonalCurvature& curv, const std::vector<HyperGroup>& groups) {
    validate_partition(groups, curv.diag.layer_count());
    ParamTensors out = curv.diag;
    for (const auto& g : groups) {
        for (std::size_t l : g.layer_indices) {
            for (double& v : out.weights[l].data) v = g.n_value * v + g.tau_value;
            for (double& v : out.biases[l]) v = g.n_value * v + g.tau_value;
        }
    }
    return PrecisionDiag{std::move(out)};
}

}  // namespace labo
