// Scoring of predictive distributions: accuracy, NLL, expected calibration
// error over equal-width confidence bins, the scalar search cost, and the
// plot-ready reliability bins.
#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "labo/math.hpp"

namespace labo {

struct ReliabilityBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_confidence = std::numeric_limits<double>::quiet_NaN();  // NaN when empty
    double accuracy = std::numeric_limits<double>::quiet_NaN();         // NaN when empty
};

struct ReliabilityBins {
    std::size_t m_bins = 0;
    std::size_t total = 0;
    std::vector<ReliabilityBin> bins;

    /// Count-weighted |accuracy - confidence| over occupied bins, in percent.
    /// This is the ECE definition shared with score().
    double ece_pct() const {
        double e = 0.0;
        for (const auto& b : bins) {
            if (b.count == 0) continue;
            e += static_cast<double>(b.count) / static_cast<double>(total) * std::abs(b.accuracy - b.mean_confidence);
        }
        return e * 100.0;
    }
};

struct ScoreReport {
    double accuracy_pct = 0.0;
    double nll = 0.0;      // nats
    double ece_pct = 0.0;
    double cost = 0.0;     // always exactly (100 - accuracy_pct) + ece_pct
};

namespace detail {

inline std::size_t argmax_row(const double* p, std::size_t k) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (p[j] > p[arg]) arg = j;  // ties keep the lowest class index
    return arg;
}

inline void check_scoring_input(const Matrix& probs, const std::vector<int>& labels, std::size_t m_bins) {
    if (probs.rows == 0) throw std::invalid_argument("score: empty input");
    if (probs.rows != labels.size()) throw std::invalid_argument("score: row/label count mismatch");
    if (m_bins < 1) throw std::invalid_argument("score: need at least one bin");
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols) throw std::invalid_argument("score: label out of range");
    }
}

}  // namespace detail

/// Equal-width confidence bins over [0, 1]. Confidence is the max class
/// probability; a confidence of exactly 1.0 lands in the top bin.
inline ReliabilityBins reliability(const Matrix& probs, const std::vector<int>& labels, std::size_t m_bins) {
    detail::check_scoring_input(probs, labels, m_bins);
    ReliabilityBins out;
    out.m_bins = m_bins;
    out.total = probs.rows;
    out.bins.resize(m_bins);
    std::vector<double> conf_sum(m_bins, 0.0);
    std::vector<std::size_t> hit_sum(m_bins, 0);
    for (std::size_t b = 0; b < m_bins; ++b) {
        out.bins[b].lo = static_cast<double>(b) / static_cast<double>(m_bins);
        out.bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(m_bins);
    }
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double* p = probs.row(i);
        const std::size_t arg = detail::argmax_row(p, probs.cols);
        const double conf = p[arg];
        auto b = static_cast<std::size_t>(conf * static_cast<double>(m_bins));
        if (b >= m_bins) b = m_bins - 1;
        out.bins[b].count += 1;
        conf_sum[b] += conf;
        if (static_cast<int>(arg) == labels[i]) hit_sum[b] += 1;
    }
    for (std::size_t b = 0; b < m_bins; ++b) {
        if (out.bins[b].count == 0) continue;  // left flagged by NaN aggregates
        out.bins[b].mean_confidence = conf_sum[b] / static_cast<double>(out.bins[b].count);
        out.bins[b].accuracy = static_cast<double>(hit_sum[b]) / static_cast<double>(out.bins[b].count);
    }
    return out;
}

/// Scores a batch of predictive distributions against integer labels.
inline ScoreReport score(const Matrix& probs, const std::vector<int>& labels, std::size_t m_bins) {
    const ReliabilityBins bins = reliability(probs, labels, m_bins);
    std::size_t correct = 0;
    double nll_sum = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double* p = probs.row(i);
        if (detail::argmax_row(p, probs.cols) == static_cast<std::size_t>(labels[i])) ++correct;
        nll_sum -= std::log(p[static_cast<std::size_t>(labels[i])]);
    }
    ScoreReport r;
    r.accuracy_pct = 100.0 * static_cast<double>(correct) / static_cast<double>(probs.rows);
    r.nll = nll_sum / static_cast<double>(probs.rows);
    r.ece_pct = bins.ece_pct();
    r.cost = (100.0 - r.accuracy_pct) + r.ece_pct;
    return r;
}

/// Mean predictive entropy over all rows, in nats.
inline double mean_entropy(const Matrix& probs) {
    if (probs.rows == 0) throw std::invalid_argument("mean_entropy: empty input");
    double h = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) h += entropy(probs.row(i), probs.cols);
    return h / static_cast<double>(probs.rows);
}

/// Plot-ready CSV form of the reliability bins.
inline std::string to_csv(const ReliabilityBins& bins) {
    std::string out = "# format_version=1\nbin_lo,bin_hi,count,mean_confidence,accuracy\n";
    for (const auto& b : bins.bins) {
        out += format_double(b.lo) + "," + format_double(b.hi) + "," + std::to_string(b.count) + "," +
               format_double(b.mean_confidence) + "," + format_double(b.accuracy) + "\n";
    }
    return out;
}

}  // namespace labo
