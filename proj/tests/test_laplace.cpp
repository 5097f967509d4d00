#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "labo/data.hpp"
#include "labo/laplace.hpp"
#include "labo/metrics.hpp"

using namespace labo;

namespace {

// Posterior over a trained two-moons net with a single (n, tau) group.
struct Fixture {
    Network net;
    DiagonalCurvature curv;
    Dataset val;

    Fixture() {
        const Dataset train = data::make_two_moons(400, 0.1, 71);
        val = data::make_two_moons(200, 0.1, 72);
        net = train_sgd(init_network(ArchSpec{{2, 16, 2}, Activation::Tanh}, 5), train, 60, 0.2, 32, 9);
        curv = diagonal_fisher(net, train);
    }

    LaplacePosterior posterior(double n, double tau) const {
        const std::vector<HyperGroup> groups{{{0, 1}, n, tau}};
        return LaplacePosterior{net, regularize(curv, groups), groups};
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("sample_weights collapses to the mean under huge precision", "[laplace]") {
    const auto post = fixture().posterior(1e-8, 1e12);
    auto eng = rng::make_engine(1);
    const Network sample = sample_weights(post, eng);
    for (std::size_t l = 0; l < sample.layer_count(); ++l) {
        for (std::size_t k = 0; k < sample.params.weights[l].data.size(); ++k)
            REQUIRE(std::abs(sample.params.weights[l].data[k] - post.mean.params.weights[l].data[k]) < 1e-5);
        for (std::size_t k = 0; k < sample.params.biases[l].size(); ++k)
            REQUIRE(std::abs(sample.params.biases[l][k] - post.mean.params.biases[l][k]) < 1e-5);
    }
}

TEST_CASE("sample_weights is deterministic per seed", "[laplace]") {
    const auto post = fixture().posterior(100.0, 0.1);
    auto eng_a = rng::make_engine(42);
    auto eng_b = rng::make_engine(42);
    const Network a = sample_weights(post, eng_a);
    const Network b = sample_weights(post, eng_b);
    for (std::size_t l = 0; l < a.layer_count(); ++l) REQUIRE(a.params.weights[l].data == b.params.weights[l].data);
}

TEST_CASE("sampler variance matches the inverse precision", "[laplace]") {
    // single scalar parameter with precision 4 -> variance 0.25
    const ArchSpec arch{{1, 1}, Activation::Tanh};
    Network mean{arch, ParamTensors::zeros(arch)};
    mean.params.weights[0](0, 0) = 2.0;
    PrecisionDiag prec{ParamTensors::zeros(arch)};
    prec.diag.weights[0](0, 0) = 4.0;
    prec.diag.biases[0][0] = 4.0;
    const LaplacePosterior post{mean, prec, {{{0}, 1.0, 4.0}}};

    auto eng = rng::make_engine(7);
    const std::size_t draws = 10000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const Network s = sample_weights(post, eng);
        const double v = s.params.weights[0](0, 0);
        sum += v;
        sq += v * v;
    }
    const double m = sum / static_cast<double>(draws);
    const double var = sq / static_cast<double>(draws) - m * m;
    REQUIRE(std::abs(var - 0.25) / 0.25 < 0.05);
    // unbiased: sample mean within 3 standard errors of the posterior mean
    const double se = 0.5 / std::sqrt(static_cast<double>(draws));
    REQUIRE(std::abs(m - 2.0) < 3.0 * se);
}

TEST_CASE("predict_mc with one sample and degenerate posterior equals forward", "[laplace]") {
    const auto& f = fixture();
    const auto post = f.posterior(1e-8, 1e12);
    const auto pred = predict_mc(post, f.val.inputs, 1, 99);
    const Matrix det = forward_batch(f.net, f.val.inputs);
    for (std::size_t i = 0; i < det.rows; ++i)
        for (std::size_t k = 0; k < det.cols; ++k) REQUIRE(std::abs(pred.probs(i, k) - det(i, k)) < 1e-5);
}

TEST_CASE("predict_mc rows stay in the simplex", "[laplace][property]") {
    const auto& f = fixture();
    const auto pred = predict_mc(f.posterior(10.0, 0.05), f.val.inputs, 7, 3);
    REQUIRE(pred.t_samples == 7);
    for (std::size_t i = 0; i < pred.probs.rows; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < pred.probs.cols; ++k) {
            REQUIRE(pred.probs(i, k) >= 0.0);
            sum += pred.probs(i, k);
        }
        REQUIRE(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("predict_mc is deterministic per seed", "[laplace]") {
    const auto& f = fixture();
    const auto post = f.posterior(100.0, 0.1);
    const auto a = predict_mc(post, f.val.inputs, 5, 17);
    const auto b = predict_mc(post, f.val.inputs, 5, 17);
    REQUIRE(a.probs.data == b.probs.data);
}

TEST_CASE("predict_mc at T=30 tracks a high-T reference", "[laplace][slow]") {
    const auto& f = fixture();
    const auto post = f.posterior(1000.0, 1.0);
    const auto small = predict_mc(post, f.val.inputs, 30, 5);
    const auto large = predict_mc(post, f.val.inputs, 2000, 6);
    double abs_diff = 0.0;
    for (std::size_t i = 0; i < small.probs.data.size(); ++i)
        abs_diff += std::abs(small.probs.data[i] - large.probs.data[i]);
    abs_diff /= static_cast<double>(small.probs.data.size());
    REQUIRE(abs_diff < 0.05);
}

TEST_CASE("degenerate posterior reproduces deterministic argmax exactly", "[laplace]") {
    const auto& f = fixture();
    const auto pred = predict_mc(f.posterior(1e-8, 1e12), f.val.inputs, 30, 21);
    const Matrix det = forward_batch(f.net, f.val.inputs);
    for (std::size_t i = 0; i < det.rows; ++i) {
        const std::size_t a = pred.probs(i, 0) >= pred.probs(i, 1) ? 0 : 1;
        const std::size_t b = det(i, 0) >= det(i, 1) ? 0 : 1;
        REQUIRE(a == b);
    }
}

TEST_CASE("predictive entropy shrinks as tau grows", "[laplace][property]") {
    // The ladder drops by ~0.5 nats overall; near the deterministic limit the
    // MC average converges from below, so consecutive steps may wobble at the
    // 1e-4 scale. The slack covers that Monte Carlo floor and nothing more.
    const auto& f = fixture();
    const double taus[] = {1e0, 1e2, 1e4, 1e8, 1e12};
    double prev = std::numeric_limits<double>::infinity();
    double first = 0.0, last = 0.0;
    for (double tau : taus) {
        const auto pred = predict_mc(f.posterior(1.0, tau), f.val.inputs, 30, 13);
        const double h = mean_entropy(pred.probs);
        REQUIRE(h <= prev + 1e-3);
        if (tau == 1e0) first = h;
        last = h;
        prev = h;
    }
    REQUIRE(last < 0.5 * first);  // the decrease itself is large
}

TEST_CASE("predict_mc validates arguments", "[laplace]") {
    const auto& f = fixture();
    const auto post = f.posterior(1.0, 1.0);
    REQUIRE_THROWS_AS(predict_mc(post, f.val.inputs, 0, 1), std::invalid_argument);
    const Matrix wrong(3, 5);
    REQUIRE_THROWS_AS(predict_mc(post, wrong, 1, 1), std::invalid_argument);
}
