// Acquisition utilities under the minimization convention: lower posterior
// mean is better, `best` is the lowest cost observed so far.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "labo/math.hpp"

namespace labo {

/// Expected improvement over `best` (minus the margin xi). Non-negative;
/// maximized by the search. At std = 0 it degenerates to max(best-mean-xi, 0).
inline double expected_improvement(double mean, double std, double best, double xi) {
    if (std < 0.0) throw std::invalid_argument("expected_improvement: negative std");
    const double gap = best - mean - xi;
    if (std == 0.0) return std::max(gap, 0.0);
    const double z = gap / std;
    return gap * normal_cdf(z) + std * normal_pdf(z);
}

/// mean - kappa * std; minimized by the search (optimistic cost bound).
inline double lower_confidence_bound(double mean, double std, double kappa) {
    if (std < 0.0) throw std::invalid_argument("lower_confidence_bound: negative std");
    if (kappa <= 0.0) throw std::invalid_argument("lower_confidence_bound: kappa must be positive");
    return mean - kappa * std;
}

/// Probability that the cost at a point beats best - xi. In [0, 1]; maximized.
inline double probability_of_improvement(double mean, double std, double best, double xi) {
    if (std < 0.0) throw std::invalid_argument("probability_of_improvement: negative std");
    const double gap = best - mean - xi;
    if (std == 0.0) return gap > 0.0 ? 1.0 : 0.0;
    return normal_cdf(gap / std);
}

}  // namespace labo
