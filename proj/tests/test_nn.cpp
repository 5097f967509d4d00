#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "labo/data.hpp"
#include "labo/io.hpp"
#include "labo/nn.hpp"
#include "oracles.hpp"

using namespace labo;

namespace {

Dataset random_dataset(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed) {
    Dataset d;
    d.inputs = Matrix(n, dim);
    d.labels.resize(n);
    auto eng = rng::make_engine(seed);
    for (double& v : d.inputs.data) v = rng::normal01(eng);
    for (auto& y : d.labels) y = static_cast<int>(eng() % classes);
    return d;
}

}  // namespace

TEST_CASE("init_network is deterministic and shape-correct", "[nn]") {
    const ArchSpec arch{{2, 4, 2}, Activation::Tanh};
    const Network a = init_network(arch, 7);
    const Network b = init_network(arch, 7);
    REQUIRE(a.params.weights.size() == 2);
    for (std::size_t l = 0; l < 2; ++l) {
        REQUIRE(a.params.weights[l].data == b.params.weights[l].data);
        REQUIRE(a.params.biases[l] == b.params.biases[l]);
    }
    const Network c = init_network(arch, 8);
    REQUIRE(a.params.weights[0].data != c.params.weights[0].data);
}

TEST_CASE("init_network shapes for [2,2]", "[nn]") {
    const Network net = init_network(ArchSpec{{2, 2}, Activation::Tanh}, 1);
    REQUIRE(net.layer_count() == 1);
    REQUIRE(net.params.weights[0].rows == 2);
    REQUIRE(net.params.weights[0].cols == 2);
    REQUIRE(net.params.biases[0].size() == 2);
    for (double b : net.params.biases[0]) REQUIRE(b == 0.0);
}

TEST_CASE("init_network weight scale follows 1/sqrt(fan_in)", "[nn]") {
    const Network net = init_network(ArchSpec{{2, 8, 8, 3}, Activation::Tanh}, 0);
    const auto& w = net.params.weights[0].data;  // 16 draws with stddev 1/sqrt(2)
    double sq = 0.0;
    for (double v : w) sq += v * v;
    const double stddev = std::sqrt(sq / static_cast<double>(w.size()));
    const double target = 1.0 / std::sqrt(2.0);
    REQUIRE(stddev > 0.8 * target);
    REQUIRE(stddev < 1.2 * target);
}

TEST_CASE("init_network rejects invalid archs", "[nn]") {
    REQUIRE_THROWS_AS(init_network(ArchSpec{{3}, Activation::Tanh}, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(init_network(ArchSpec{{3, 0, 2}, Activation::Tanh}, 0), std::invalid_argument);
}

TEST_CASE("forward of all-zero weights is uniform", "[nn]") {
    Network net{ArchSpec{{3, 4, 5}, Activation::Tanh}, ParamTensors::zeros(ArchSpec{{3, 4, 5}, Activation::Tanh})};
    const auto p = forward(net, std::vector<double>{0.3, -1.0, 2.0});
    for (double v : p) REQUIRE(v == Catch::Approx(1.0 / 5.0).margin(1e-12));
}

TEST_CASE("forward of equal logits splits evenly", "[nn]") {
    // single linear layer mapping onto logits (1, 1)
    Network net{ArchSpec{{1, 2}, Activation::Tanh}, ParamTensors::zeros(ArchSpec{{1, 2}, Activation::Tanh})};
    net.params.weights[0](0, 0) = 1.0;
    net.params.weights[0](1, 0) = 1.0;
    const auto p = forward(net, std::vector<double>{1.0});
    REQUIRE(p[0] == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(p[1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("forward output stays in the simplex", "[nn]") {
    auto eng = rng::make_engine(11);
    const Network net = init_network(ArchSpec{{3, 8, 4}, Activation::Relu}, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(3);
        for (double& v : x) v = 20.0 * rng::normal01(eng);
        const auto p = forward(net, x);
        double sum = 0.0;
        for (double v : p) {
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("forward rejects bad input", "[nn]") {
    const Network net = init_network(ArchSpec{{2, 3, 2}, Activation::Tanh}, 0);
    REQUIRE_THROWS_AS(forward(net, std::vector<double>{1.0}), std::invalid_argument);
    const double inf = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(forward(net, std::vector<double>{1.0, inf}), std::invalid_argument);
}

TEST_CASE("grad_nll of a single linear layer has the closed form", "[nn]") {
    Network net{ArchSpec{{2, 3}, Activation::Tanh}, ParamTensors::zeros(ArchSpec{{2, 3}, Activation::Tanh})};
    auto eng = rng::make_engine(21);
    for (double& v : net.params.weights[0].data) v = rng::normal01(eng);
    for (double& v : net.params.biases[0]) v = rng::normal01(eng);
    const std::vector<double> x{0.7, -1.3};
    const int y = 2;

    const auto probs = forward(net, x);
    const Gradient g = grad_nll(net, x, y);
    for (std::size_t j = 0; j < 3; ++j) {
        const double dlogit = probs[j] - (j == 2 ? 1.0 : 0.0);
        REQUIRE(g.biases[0][j] == Catch::Approx(dlogit).epsilon(1e-12));
        REQUIRE(g.weights[0](j, 0) == Catch::Approx(dlogit * x[0]).epsilon(1e-12));
        REQUIRE(g.weights[0](j, 1) == Catch::Approx(dlogit * x[1]).epsilon(1e-12));
    }
    const Gradient fd = oracle::fd_grad_nll(net, x, y);
    REQUIRE(oracle::max_rel_err(g, fd) < 1e-4);
}

TEST_CASE("grad_nll vanishes at a saturated correct prediction", "[nn]") {
    Network net{ArchSpec{{1, 2}, Activation::Tanh}, ParamTensors::zeros(ArchSpec{{1, 2}, Activation::Tanh})};
    net.params.biases[0][0] = 40.0;   // p(class 0) == 1 to double precision
    net.params.biases[0][1] = -40.0;
    const Gradient g = grad_nll(net, std::vector<double>{0.0}, 0);
    double norm = 0.0;
    for (double v : g.weights[0].data) norm += v * v;
    for (double v : g.biases[0]) norm += v * v;
    REQUIRE(std::sqrt(norm) < 1e-6);
}

TEST_CASE("grad_nll matches finite differences on random cases", "[nn][property]") {
    auto eng = rng::make_engine(31);
    const ArchSpec arch{{2, 4, 2}, Activation::Tanh};
    for (int trial = 0; trial < 60; ++trial) {
        const Network net = init_network(arch, 100 + static_cast<std::uint64_t>(trial));
        std::vector<double> x{rng::normal01(eng), rng::normal01(eng)};
        const int y = static_cast<int>(eng() % 2);
        const Gradient g = grad_nll(net, x, y);
        const Gradient fd = oracle::fd_grad_nll(net, x, y);
        REQUIRE(oracle::max_rel_err(g, fd) < 1e-4);
    }
}

TEST_CASE("grad_nll matches finite differences with relu hidden layers", "[nn][property]") {
    auto eng = rng::make_engine(37);
    const ArchSpec arch{{3, 5, 3}, Activation::Relu};
    for (int trial = 0; trial < 20; ++trial) {
        const Network net = init_network(arch, 500 + static_cast<std::uint64_t>(trial));
        std::vector<double> x{rng::normal01(eng), rng::normal01(eng), rng::normal01(eng)};
        const int y = static_cast<int>(eng() % 3);
        const Gradient g = grad_nll(net, x, y);
        const Gradient fd = oracle::fd_grad_nll(net, x, y);
        REQUIRE(oracle::max_rel_err(g, fd) < 1e-4);
    }
}

TEST_CASE("train_sgd with lr = 0 is the identity", "[nn]") {
    const Network net = init_network(ArchSpec{{2, 4, 2}, Activation::Tanh}, 13);
    const Dataset data = random_dataset(16, 2, 2, 3);
    const Network out = train_sgd(net, data, 3, 0.0, 4, 9);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        REQUIRE(out.params.weights[l].data == net.params.weights[l].data);
        REQUIRE(out.params.biases[l] == net.params.biases[l]);
    }
}

TEST_CASE("train_sgd is bit-reproducible and reduces the loss", "[nn]") {
    const Dataset data = data::make_two_moons(300, 0.1, 17);
    const Network net = init_network(ArchSpec{{2, 8, 2}, Activation::Tanh}, 2);
    const Network a = train_sgd(net, data, 30, 0.2, 32, 5);
    const Network b = train_sgd(net, data, 30, 0.2, 32, 5);
    for (std::size_t l = 0; l < a.layer_count(); ++l) REQUIRE(a.params.weights[l].data == b.params.weights[l].data);
    REQUIRE(mean_nll(a, data) <= mean_nll(net, data));
}

TEST_CASE("train_sgd separates linearly separable blobs", "[nn][slow]") {
    const Dataset train = data::make_blobs(400, 2, 5.0, 0.5, 23);
    const double lr_oracle = oracle::logistic_regression_accuracy(train);
    REQUIRE(lr_oracle >= 99.0);
    const Network net = train_sgd(init_network(ArchSpec{{2, 8, 2}, Activation::Tanh}, 1), train, 50, 0.3, 32, 7);
    REQUIRE(accuracy_pct(net, train) >= 99.0);
}

TEST_CASE("train_sgd reaches 90% validation accuracy on two moons", "[nn][slow]") {
    const Dataset train = data::make_two_moons(2000, 0.1, 41);
    const Dataset val = data::make_two_moons(1000, 0.1, 42);
    const Network net =
        train_sgd(init_network(ArchSpec{{2, 32, 32, 2}, Activation::Tanh}, 3), train, 200, 0.2, 64, 11);
    const double acc = accuracy_pct(net, val);
    REQUIRE(acc >= 90.0);
    // deep-interior class-0 point is classified with high confidence
    const auto p = forward(net, std::vector<double>{-1.0, 0.25});
    REQUIRE(p[0] > 0.9);
}

TEST_CASE("train_sgd validates arguments", "[nn]") {
    const Network net = init_network(ArchSpec{{2, 2}, Activation::Tanh}, 0);
    const Dataset data = random_dataset(8, 2, 2, 1);
    REQUIRE_THROWS_AS(train_sgd(net, data, 0, 0.1, 4, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(train_sgd(net, data, 1, 0.1, 0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(train_sgd(net, data, 1, 0.1, 9, 1), std::invalid_argument);
}

TEST_CASE("network file round-trips bit-exactly", "[nn][io]") {
    const Network net = init_network(ArchSpec{{3, 7, 4}, Activation::Relu}, 19);
    const auto path = std::filesystem::temp_directory_path() / "labo_net_roundtrip.bin";
    io::save_network(path.string(), net);
    const Network back = io::load_network(path.string());
    REQUIRE(back.arch == net.arch);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        REQUIRE(back.params.weights[l].data == net.params.weights[l].data);
        REQUIRE(back.params.biases[l] == net.params.biases[l]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("network loader rejects foreign files", "[nn][io]") {
    const auto path = std::filesystem::temp_directory_path() / "labo_not_a_network.bin";
    std::ofstream(path) << "definitely not a network";
    REQUIRE_THROWS_AS(io::load_network(path.string()), std::runtime_error);
    std::filesystem::remove(path);
}
