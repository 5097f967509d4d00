// Sequential search over a black-box cost: seeded space-filling
// initialization, GP surrogate, an EI/LCB/PI portfolio whose member is picked
// by multiplicative-weight (Hedge) probabilities, and the uniform
// random-search baseline. Traces are fully reproducible from the config.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "labo/acquisition.hpp"
#include "labo/gp.hpp"
#include "labo/rng.hpp"

namespace labo {

enum class AcqChoice { Ei, Lcb, Pi, Random, Init };

inline std::string to_string(AcqChoice c) {
    switch (c) {
        case AcqChoice::Ei: return "ei";
        case AcqChoice::Lcb: return "lcb";
        case AcqChoice::Pi: return "pi";
        case AcqChoice::Random: return "random";
        case AcqChoice::Init: return "init";
    }
    throw std::logic_error("unknown acquisition choice");
}

inline AcqChoice acq_choice_from_string(const std::string& s) {
    if (s == "ei") return AcqChoice::Ei;
    if (s == "lcb") return AcqChoice::Lcb;
    if (s == "pi") return AcqChoice::Pi;
    if (s == "random") return AcqChoice::Random;
    if (s == "init") return AcqChoice::Init;
    throw std::invalid_argument("unknown acquisition choice: " + s);
}

/// Multiplicative-weights state over the EI/LCB/PI portfolio.
struct HedgeState {
    std::array<double, 3> weights{1.0, 1.0, 1.0};
    double beta = 0.9;  // in [0, 1]

    std::array<double, 3> probabilities() const {
        const double sum = weights[0] + weights[1] + weights[2];
        return {weights[0] / sum, weights[1] / sum, weights[2] / sum};
    }
};

/// w_i <- w_i * beta^{c_i}, with costs pre-normalized to [0, 1]. Weights are
/// renormalized to sum 1 afterwards, which leaves selection probabilities
/// unchanged and prevents underflow over long runs.
inline HedgeState hedge_update(const HedgeState& state, const std::array<double, 3>& costs) {
    if (state.beta < 0.0 || state.beta > 1.0) throw std::invalid_argument("hedge_update: beta outside [0, 1]");
    HedgeState next = state;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!std::isfinite(costs[i])) throw std::invalid_argument("hedge_update: non-finite cost");
        next.weights[i] = state.weights[i] * std::pow(state.beta, costs[i]);
    }
    const double sum = next.weights[0] + next.weights[1] + next.weights[2];
    if (!(sum > 0.0)) throw std::runtime_error("hedge_update: all weights collapsed to zero");
    for (double& w : next.weights) w /= sum;
    return next;
}

struct SearchConfig {
    std::vector<std::array<double, 2>> bounds;  // per-dimension [lo, hi], log10 units
    std::size_t budget = 50;
    std::size_t n_init = 5;
    std::size_t candidate_count = 2048;
    double beta = 0.9;
    double kappa = 2.0;
    double xi = 0.01;
    std::uint64_t seed = 0;       // drives proposals and random draws
    std::uint64_t eval_seed = 0;  // shared by every objective evaluation (common random numbers)

    std::size_t dims() const { return bounds.size(); }

    void validate() const {
        if (bounds.empty()) throw std::invalid_argument("search config: no bounds");
        for (const auto& b : bounds)
            if (!(b[0] < b[1])) throw std::invalid_argument("search config: empty bounds interval");
        if (n_init < 1 || candidate_count < 1) throw std::invalid_argument("search config: bad counts");
        if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("search config: beta outside [0, 1]");
    }
};

/// One black-box evaluation. Cost is always exactly (100 - accuracy) + ece.
struct EvaluationRecord {
    std::size_t iteration = 0;
    SearchPoint point;
    AcqChoice chosen = AcqChoice::Init;
    double accuracy_pct = 0.0;
    double ece_pct = 0.0;
    double cost = 0.0;
    std::uint64_t eval_seed = 0;
};

/// What the black box reports for one point; the search derives cost from it.
struct ObjectiveValue {
    double accuracy_pct = 0.0;
    double ece_pct = 0.0;
};

/// (point, shared evaluation seed, iteration index) -> measured value.
/// Throwing signals a failed evaluation; the search penalizes and continues.
using Objective = std::function<ObjectiveValue(const SearchPoint&, std::uint64_t, std::size_t)>;

struct PortfolioProposal {
    SearchPoint chosen;
    AcqChoice kind = AcqChoice::Ei;
    std::array<SearchPoint, 3> proposals;  // EI, LCB, PI order
};

namespace bo_detail {

// Shifted-Halton candidate block: low-discrepancy coverage of the bounds box
// with a per-call random shift so successive calls explore fresh candidates.
inline std::vector<SearchPoint> candidate_block(const SearchConfig& cfg, std::size_t count, rng::Engine& eng) {
    const std::size_t d = cfg.dims();
    std::vector<double> shift(d);
    for (double& s : shift) s = rng::uniform01(eng);
    std::vector<SearchPoint> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto u = rng::halton(i + 1, d);
        SearchPoint p(d);
        for (std::size_t j = 0; j < d; ++j) {
            double v = u[j] + shift[j];
            v -= std::floor(v);  // wrap to [0, 1)
            p[j] = cfg.bounds[j][0] + v * (cfg.bounds[j][1] - cfg.bounds[j][0]);
        }
        out[i] = std::move(p);
    }
    return out;
}

inline double worst_cost(const std::vector<EvaluationRecord>& records) {
    // Penalty for failed evaluations: the worst cost seen so far, or the
    // ceiling of the cost scale (100% error + 100% ECE) before any success.
    double worst = 200.0;
    bool any = false;
    for (const auto& r : records) {
        if (!any || r.cost > worst) worst = r.cost;
        any = true;
    }
    return worst;
}

inline EvaluationRecord evaluate_into_record(const Objective& objective, const SearchPoint& point,
                                             AcqChoice kind, std::size_t iteration,
                                             const std::vector<EvaluationRecord>& so_far,
                                             std::uint64_t eval_seed) {
    EvaluationRecord rec;
    rec.iteration = iteration;
    rec.point = point;
    rec.chosen = kind;
    rec.eval_seed = eval_seed;
    try {
        const ObjectiveValue v = objective(point, eval_seed, iteration);
        rec.accuracy_pct = v.accuracy_pct;
        rec.ece_pct = v.ece_pct;
    } catch (const std::exception&) {
        const double penalty = worst_cost(so_far);
        rec.accuracy_pct = 100.0 - penalty;
        rec.ece_pct = 0.0;
    }
    rec.cost = (100.0 - rec.accuracy_pct) + rec.ece_pct;
    return rec;
}

}  // namespace bo_detail

/// Optimizes all three acquisitions over one shared seeded candidate set and
/// picks a proposal with the Hedge selection probabilities. Deterministic
/// given the engine state; ties in the candidate scan keep the lowest index.
inline PortfolioProposal propose_portfolio(const GPModel& model, const HedgeState& hedge, const SearchConfig& cfg,
                                           rng::Engine& eng) {
    cfg.validate();
    const auto candidates = bo_detail::candidate_block(cfg, cfg.candidate_count, eng);
    double best_cost = model.y_shift + model.y_scale * model.y_std_units[0];
    for (std::size_t i = 1; i < model.y_std_units.size(); ++i)
        best_cost = std::min(best_cost, model.y_shift + model.y_scale * model.y_std_units[i]);

    double best_ei = 0.0, best_lcb = 0.0, best_pi = 0.0;
    std::array<std::size_t, 3> pick{0, 0, 0};
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto post = gp_posterior(model, candidates[i]);
        const double ei = expected_improvement(post.mean, post.std, best_cost, cfg.xi);
        const double lcb = lower_confidence_bound(post.mean, post.std, cfg.kappa);
        const double pi = probability_of_improvement(post.mean, post.std, best_cost, cfg.xi);
        if (i == 0 || ei > best_ei) { best_ei = ei; pick[0] = i; }
        if (i == 0 || lcb < best_lcb) { best_lcb = lcb; pick[1] = i; }
        if (i == 0 || pi > best_pi) { best_pi = pi; pick[2] = i; }
    }

    PortfolioProposal out;
    out.proposals = {candidates[pick[0]], candidates[pick[1]], candidates[pick[2]]};
    const auto probs = hedge.probabilities();
    const double u = rng::uniform01(eng);
    std::size_t choice = 2;
    if (u < probs[0]) {
        choice = 0;
    } else if (u < probs[0] + probs[1]) {
        choice = 1;
    }
    out.kind = choice == 0 ? AcqChoice::Ei : choice == 1 ? AcqChoice::Lcb : AcqChoice::Pi;
    out.chosen = out.proposals[choice];
    return out;
}

/// The full sequential loop: n_init space-filling evaluations, then
/// fit -> propose -> evaluate -> score the portfolio until the budget is
/// spent. Returns the complete evaluation trace in order.
inline std::vector<EvaluationRecord> bo_search(const Objective& objective, const SearchConfig& cfg,
                                               const KernelConfig& kernel = {}) {
    cfg.validate();
    if (cfg.budget < cfg.n_init) throw std::invalid_argument("bo_search: budget smaller than n_init");
    auto eng = rng::make_engine(cfg.seed);
    std::vector<EvaluationRecord> records;
    records.reserve(cfg.budget);

    for (const auto& p : bo_detail::candidate_block(cfg, cfg.n_init, eng)) {
        if (records.size() >= cfg.budget) break;
        records.push_back(
            bo_detail::evaluate_into_record(objective, p, AcqChoice::Init, records.size(), records, cfg.eval_seed));
    }

    HedgeState hedge;
    hedge.beta = cfg.beta;
    std::vector<SearchPoint> points;
    std::vector<double> costs;
    while (records.size() < cfg.budget) {
        points.clear();
        costs.clear();
        for (const auto& r : records) {
            points.push_back(r.point);
            costs.push_back(r.cost);
        }
        const GPModel model = gp_fit(points, costs, kernel);
        const PortfolioProposal prop = propose_portfolio(model, hedge, cfg, eng);
        records.push_back(
            bo_detail::evaluate_into_record(objective, prop.chosen, prop.kind, records.size(), records, cfg.eval_seed));

        // Hedge feedback: refit with the new observation, read the posterior
        // mean cost at each proposal, and min-max normalize across the three.
        points.push_back(records.back().point);
        costs.push_back(records.back().cost);
        const GPModel refit = gp_fit(points, costs, kernel);
        std::array<double, 3> raw{};
        for (std::size_t i = 0; i < 3; ++i) raw[i] = gp_posterior(refit, prop.proposals[i]).mean;
        const double lo = std::min({raw[0], raw[1], raw[2]});
        const double hi = std::max({raw[0], raw[1], raw[2]});
        std::array<double, 3> normed{0.0, 0.0, 0.0};
        if (hi > lo) {
            for (std::size_t i = 0; i < 3; ++i) normed[i] = (raw[i] - lo) / (hi - lo);
        }
        hedge = hedge_update(hedge, normed);
    }
    return records;
}

/// Budget i.i.d. uniform draws over the bounds box, evaluated in order.
inline std::vector<EvaluationRecord> random_search(const Objective& objective, const SearchConfig& cfg) {
    cfg.validate();
    if (cfg.budget < 1) throw std::invalid_argument("random_search: empty budget");
    auto eng = rng::make_engine(cfg.seed);
    std::vector<EvaluationRecord> records;
    records.reserve(cfg.budget);
    for (std::size_t i = 0; i < cfg.budget; ++i) {
        SearchPoint p(cfg.dims());
        for (std::size_t j = 0; j < cfg.dims(); ++j) p[j] = rng::uniform(eng, cfg.bounds[j][0], cfg.bounds[j][1]);
        records.push_back(bo_detail::evaluate_into_record(objective, p, AcqChoice::Random, i, records, cfg.eval_seed));
    }
    return records;
}

/// Running minimum of the cost column of a trace.
inline std::vector<double> best_so_far(const std::vector<EvaluationRecord>& records) {
    std::vector<double> best(records.size());
    double cur = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < records.size(); ++i) {
        cur = std::min(cur, records[i].cost);
        best[i] = cur;
    }
    return best;
}

}  // namespace labo
