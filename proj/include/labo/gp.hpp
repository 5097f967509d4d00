// Exact Gaussian-process regression with a squared-exponential kernel over
// log10-scaled search coordinates. Costs are standardized inside the model;
// the lengthscale is picked from a fixed grid by log marginal likelihood.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "labo/math.hpp"

namespace labo {

using SearchPoint = std::vector<double>;

struct KernelConfig {
    std::vector<double> lengthscale_grid{0.25, 0.5, 1.0, 2.0, 4.0};
    double signal_var = 1.0;  // in standardized cost units
    double noise_var = 0.01;  // in standardized cost units
};

struct GPModel {
    Matrix x;                  // n x d observed points
    std::vector<double> y_std_units;  // standardized observed costs
    double y_shift = 0.0;      // cost = y_shift + y_scale * standardized
    double y_scale = 1.0;
    double lengthscale = 1.0;
    KernelConfig kernel;
    Matrix chol;               // lower-triangular factor of K + noise*I (+ jitter)
    std::vector<double> alpha;  // (K + noise*I)^{-1} y, standardized units

    std::size_t size() const { return x.rows; }
    std::size_t dim() const { return x.cols; }
};

namespace gp_detail {

inline double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

inline double se_kernel(const double* a, const double* b, std::size_t d, double lengthscale, double signal_var) {
    return signal_var * std::exp(-0.5 * sq_dist(a, b, d) / (lengthscale * lengthscale));
}

/// In-place lower Cholesky; returns false if the matrix is not positive definite.
inline bool cholesky(Matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j) - dot(a.row(j), a.row(j), j);
        if (!(diag > 0.0)) return false;
        diag = std::sqrt(diag);
        a(j, j) = diag;
        for (std::size_t i = j + 1; i < n; ++i) {
            a(i, j) = (a(i, j) - dot(a.row(i), a.row(j), j)) / diag;
        }
        for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
    }
    return true;
}

inline void solve_lower(const Matrix& l, std::vector<double>& b) {
    for (std::size_t i = 0; i < l.rows; ++i) {
        b[i] = (b[i] - dot(l.row(i), b.data(), i)) / l(i, i);
    }
}

inline void solve_upper_from_lower(const Matrix& l, std::vector<double>& b) {
    for (std::size_t ii = l.rows; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < l.rows; ++j) s -= l(j, ii) * b[j];
        b[ii] = s / l(ii, ii);
    }
}

struct Fit {
    Matrix chol;
    std::vector<double> alpha;
    double log_marginal = 0.0;
};

// Factorize K(X,X) + noise*I, escalating jitter 1e-10 -> 1e-6 on failure.
inline Fit fit_for_lengthscale(const Matrix& x, const std::vector<double>& y, double lengthscale,
                               const KernelConfig& cfg) {
    const std::size_t n = x.rows;
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double k = se_kernel(x.row(i), x.row(j), x.cols, lengthscale, cfg.signal_var);
            gram(i, j) = k;
            gram(j, i) = k;
        }
        gram(i, i) += cfg.noise_var;
    }
    Fit fit;
    bool ok = false;
    for (double jitter = 0.0; !ok; jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0) {
        if (jitter > 1e-6) throw std::runtime_error("gp_fit: factorization failed after jitter ladder");
        fit.chol = gram;
        if (jitter > 0.0) {
            for (std::size_t i = 0; i < n; ++i) fit.chol(i, i) += jitter;
        }
        ok = cholesky(fit.chol);
    }
    fit.alpha = y;
    solve_lower(fit.chol, fit.alpha);
    double quad = dot(fit.alpha.data(), fit.alpha.data(), n);
    double log_det_half = 0.0;
    for (std::size_t i = 0; i < n; ++i) log_det_half += std::log(fit.chol(i, i));
    solve_upper_from_lower(fit.chol, fit.alpha);
    fit.log_marginal = -0.5 * quad - log_det_half - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return fit;
}

}  // namespace gp_detail

/// Fits the surrogate on observed (point, cost) pairs. Costs are standardized
/// to zero mean / unit variance internally; degenerate spreads fall back to
/// unit scale so a single observation still fits.
inline GPModel gp_fit(const std::vector<SearchPoint>& points, const std::vector<double>& costs,
                      const KernelConfig& cfg = {}) {
    if (points.empty() || points.size() != costs.size()) throw std::invalid_argument("gp_fit: bad observation set");
    const std::size_t n = points.size();
    const std::size_t d = points.front().size();
    for (const auto& p : points)
        if (p.size() != d) throw std::invalid_argument("gp_fit: inconsistent point dimensions");
    for (double c : costs)
        if (!std::isfinite(c)) throw std::invalid_argument("gp_fit: non-finite cost");

    GPModel m;
    m.kernel = cfg;
    m.x = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m.x(i, j) = points[i][j];

    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double c : costs) var += (c - mean) * (c - mean);
    var /= static_cast<double>(n);
    m.y_shift = mean;
    m.y_scale = var > 1e-24 ? std::sqrt(var) : 1.0;
    m.y_std_units.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.y_std_units[i] = (costs[i] - m.y_shift) / m.y_scale;

    if (cfg.lengthscale_grid.empty()) throw std::invalid_argument("gp_fit: empty lengthscale grid");
    bool have_best = false;
    double best_lml = 0.0;
    gp_detail::Fit best_fit;
    for (double ls : cfg.lengthscale_grid) {
        auto fit = gp_detail::fit_for_lengthscale(m.x, m.y_std_units, ls, cfg);
        if (!have_best || fit.log_marginal > best_lml) {
            have_best = true;
            best_lml = fit.log_marginal;
            best_fit = std::move(fit);
            m.lengthscale = ls;
        }
    }
    m.chol = std::move(best_fit.chol);
    m.alpha = std::move(best_fit.alpha);
    return m;
}

struct GPPosterior {
    double mean = 0.0;
    double std = 0.0;
};

/// Exact predictive mean and standard deviation at a query point, reported in
/// cost units. The variance is the latent (noise-free) one, clamped at zero.
inline GPPosterior gp_posterior(const GPModel& m, const SearchPoint& query) {
    if (query.size() != m.dim()) throw std::invalid_argument("gp_posterior: dimension mismatch");
    const std::size_t n = m.size();
    std::vector<double> k_star(n);
    for (std::size_t i = 0; i < n; ++i)
        k_star[i] = gp_detail::se_kernel(m.x.row(i), query.data(), m.dim(), m.lengthscale, m.kernel.signal_var);
    const double mean_std_units = dot(k_star.data(), m.alpha.data(), n);
    gp_detail::solve_lower(m.chol, k_star);
    double var = m.kernel.signal_var - dot(k_star.data(), k_star.data(), n);
    if (var < 0.0) var = 0.0;
    GPPosterior post;
    post.mean = m.y_shift + m.y_scale * mean_std_units;
    post.std = m.y_scale * std::sqrt(var);
    return post;
}

}  // namespace labo
