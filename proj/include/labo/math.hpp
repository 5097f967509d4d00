// Small dense-matrix type and scalar helpers shared across the library.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace labo {

struct Matrix {
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : data(r * c, fill), rows(r), cols(c) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }
};

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// log(sum_i exp(x_i)) without overflow.
inline double log_sum_exp(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    const double m = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (double xi : x) s += std::exp(xi - m);
    return m + std::log(s);
}

/// Standard normal density.
inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal cumulative distribution.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Shannon entropy of a probability vector, in nats. 0*log(0) counts as 0.
inline double entropy(const double* p, std::size_t n) {
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    }
    return h;
}

}  // namespace labo
