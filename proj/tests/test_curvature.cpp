#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "labo/curvature.hpp"
#include "labo/data.hpp"
#include "labo/io.hpp"
#include "oracles.hpp"

using namespace labo;

namespace {

Dataset tiny_dataset(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed) {
    Dataset d;
    d.inputs = Matrix(n, dim);
    d.labels.resize(n);
    auto eng = rng::make_engine(seed);
    for (double& v : d.inputs.data) v = rng::normal01(eng);
    for (auto& y : d.labels) y = static_cast<int>(eng() % classes);
    return d;
}

}  // namespace

TEST_CASE("diagonal_fisher of a single datum is the squared gradient", "[curvature]") {
    const Network net = init_network(ArchSpec{{2, 3, 2}, Activation::Tanh}, 4);
    const Dataset one = tiny_dataset(1, 2, 2, 5);
    const auto fisher = diagonal_fisher(net, one);
    const Gradient g = grad_nll(net, std::span<const double>(one.inputs.row(0), 2), one.labels[0]);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (std::size_t k = 0; k < g.weights[l].data.size(); ++k)
            REQUIRE(fisher.diag.weights[l].data[k] == Catch::Approx(g.weights[l].data[k] * g.weights[l].data[k]));
        for (std::size_t k = 0; k < g.biases[l].size(); ++k)
            REQUIRE(fisher.diag.biases[l][k] == Catch::Approx(g.biases[l][k] * g.biases[l][k]));
    }
}

TEST_CASE("diagonal_fisher is invariant under dataset duplication", "[curvature]") {
    const Network net = init_network(ArchSpec{{2, 3, 2}, Activation::Tanh}, 6);
    const Dataset base = tiny_dataset(5, 2, 2, 7);
    Dataset doubled;
    doubled.inputs = Matrix(10, 2);
    doubled.labels.resize(10);
    for (std::size_t i = 0; i < 10; ++i) {
        const std::size_t src = i % 5;
        doubled.inputs(i, 0) = base.inputs(src, 0);
        doubled.inputs(i, 1) = base.inputs(src, 1);
        doubled.labels[i] = base.labels[src];
    }
    const auto a = diagonal_fisher(net, base);
    const auto b = diagonal_fisher(net, doubled);
    REQUIRE(oracle::max_rel_err(a.diag, b.diag) < 1e-12);
}

TEST_CASE("diagonal_fisher matches the loop oracle", "[curvature]") {
    const Network net = init_network(ArchSpec{{2, 3, 2}, Activation::Tanh}, 8);
    const Dataset data = tiny_dataset(5, 2, 2, 9);
    const auto fisher = diagonal_fisher(net, data);
    const auto ref = oracle::loop_fisher(net, data);
    REQUIRE(oracle::max_rel_err(fisher.diag, ref) < 1e-12);
}

TEST_CASE("diagonal_fisher entries are non-negative", "[curvature][property]") {
    const Network net = init_network(ArchSpec{{3, 6, 4}, Activation::Relu}, 10);
    const Dataset data = tiny_dataset(40, 3, 4, 11);
    const auto fisher = diagonal_fisher(net, data);
    for (const auto& w : fisher.diag.weights)
        for (double v : w.data) REQUIRE(v >= 0.0);
    for (const auto& b : fisher.diag.biases)
        for (double v : b) REQUIRE(v >= 0.0);
}

TEST_CASE("diagonal_fisher is invariant under dataset permutation", "[curvature][property]") {
    const Network net = init_network(ArchSpec{{2, 4, 2}, Activation::Tanh}, 12);
    const Dataset data = tiny_dataset(20, 2, 2, 13);
    Dataset reversed;
    reversed.inputs = Matrix(20, 2);
    reversed.labels.resize(20);
    for (std::size_t i = 0; i < 20; ++i) {
        const std::size_t src = 19 - i;
        reversed.inputs(i, 0) = data.inputs(src, 0);
        reversed.inputs(i, 1) = data.inputs(src, 1);
        reversed.labels[i] = data.labels[src];
    }
    const auto a = diagonal_fisher(net, data);
    const auto b = diagonal_fisher(net, reversed);
    REQUIRE(oracle::max_rel_err(a.diag, b.diag) < 1e-12);
}

TEST_CASE("diagonal_fisher rejects mismatched data", "[curvature]") {
    const Network net = init_network(ArchSpec{{2, 3, 2}, Activation::Tanh}, 1);
    const Dataset wrong_dim = tiny_dataset(4, 3, 2, 2);
    REQUIRE_THROWS_AS(diagonal_fisher(net, wrong_dim), std::invalid_argument);
}

TEST_CASE("regularize with zero curvature yields tau everywhere", "[curvature]") {
    const ArchSpec arch{{2, 3, 2}, Activation::Tanh};
    DiagonalCurvature curv{ParamTensors::zeros(arch)};
    const std::vector<HyperGroup> groups{{{0, 1}, 10.0, 0.5}};
    const auto prec = regularize(curv, groups);
    for (const auto& w : prec.diag.weights)
        for (double v : w.data) REQUIRE(v == 0.5);
    for (const auto& b : prec.diag.biases)
        for (double v : b) REQUIRE(v == 0.5);
}

TEST_CASE("regularize applies n * f + tau", "[curvature]") {
    const ArchSpec arch{{1, 2}, Activation::Tanh};
    DiagonalCurvature curv{ParamTensors::zeros(arch)};
    curv.diag.weights[0](0, 0) = 2.0;
    const auto prec = regularize(curv, {{{0}, 3.0, 1.0}});
    REQUIRE(prec.diag.weights[0](0, 0) == 7.0);
    REQUIRE(prec.diag.biases[0][0] == 1.0);
}

TEST_CASE("regularize handles distinct per-group values", "[curvature]") {
    const Network net = init_network(ArchSpec{{2, 3, 3, 2}, Activation::Tanh}, 3);
    const Dataset data = tiny_dataset(6, 2, 2, 4);
    const auto curv = diagonal_fisher(net, data);
    const std::vector<HyperGroup> groups{{{0, 1}, 100.0, 0.01}, {{2}, 2.0, 5.0}};
    const auto prec = regularize(curv, groups);
    // per-layer oracle: apply the owning group's affine map directly
    for (std::size_t l = 0; l < 3; ++l) {
        const double n = l < 2 ? 100.0 : 2.0;
        const double tau = l < 2 ? 0.01 : 5.0;
        for (std::size_t k = 0; k < curv.diag.weights[l].data.size(); ++k)
            REQUIRE(prec.diag.weights[l].data[k] == n * curv.diag.weights[l].data[k] + tau);
        for (std::size_t k = 0; k < curv.diag.biases[l].size(); ++k)
            REQUIRE(prec.diag.biases[l][k] == n * curv.diag.biases[l][k] + tau);
    }
}

TEST_CASE("regularize output dominates the group tau", "[curvature][property]") {
    const Network net = init_network(ArchSpec{{2, 4, 4, 2}, Activation::Tanh}, 5);
    const Dataset data = tiny_dataset(15, 2, 2, 6);
    const auto curv = diagonal_fisher(net, data);
    const std::vector<HyperGroup> groups{{{0, 1}, 7.5, 0.25}, {{2}, 1.0, 2.0}};
    const auto prec = regularize(curv, groups);
    for (std::size_t l = 0; l < 3; ++l) {
        const double tau = l < 2 ? 0.25 : 2.0;
        for (double v : prec.diag.weights[l].data) REQUIRE(v >= tau);
        for (double v : prec.diag.biases[l]) REQUIRE(v >= tau);
    }

    // monotone in tau and n
    const auto prec_up = regularize(curv, {{{0, 1}, 7.5, 0.5}, {{2}, 1.0, 2.0}});
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t k = 0; k < prec.diag.weights[l].data.size(); ++k)
            REQUIRE(prec_up.diag.weights[l].data[k] >= prec.diag.weights[l].data[k]);
    const auto prec_n = regularize(curv, {{{0, 1}, 15.0, 0.25}, {{2}, 1.0, 2.0}});
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t k = 0; k < prec.diag.weights[l].data.size(); ++k)
            REQUIRE(prec_n.diag.weights[l].data[k] >= prec.diag.weights[l].data[k]);
}

TEST_CASE("regularize rejects bad groups", "[curvature]") {
    const ArchSpec arch{{2, 3, 2}, Activation::Tanh};
    DiagonalCurvature curv{ParamTensors::zeros(arch)};
    REQUIRE_THROWS_AS(regularize(curv, {{{0}, 1.0, 1.0}}), std::invalid_argument);  // missing layer 1
    REQUIRE_THROWS_AS(regularize(curv, {{{0, 1}, 1.0, 1.0}, {{1}, 1.0, 1.0}}),
                      std::invalid_argument);  // overlap
    REQUIRE_THROWS_AS(regularize(curv, {{{0, 1}, -1.0, 1.0}}), std::invalid_argument);  // n <= 0
    REQUIRE_THROWS_AS(regularize(curv, {{{0, 1}, 1.0, 0.0}}), std::invalid_argument);   // tau <= 0
    REQUIRE_THROWS_AS(regularize(curv, {{{0, 2}, 1.0, 1.0}}), std::invalid_argument);   // unknown layer
}

TEST_CASE("curvature file round-trips and rejects arch mismatch", "[curvature][io]") {
    const Network net = init_network(ArchSpec{{2, 3, 2}, Activation::Tanh}, 14);
    const Dataset data = tiny_dataset(8, 2, 2, 15);
    const auto fisher = diagonal_fisher(net, data);
    const auto path = std::filesystem::temp_directory_path() / "labo_curv_roundtrip.bin";
    io::save_curvature(path.string(), net.arch, fisher.diag);
    const auto back = io::load_curvature(path.string(), net.arch);
    for (std::size_t l = 0; l < fisher.diag.layer_count(); ++l)
        REQUIRE(back.weights[l].data == fisher.diag.weights[l].data);
    REQUIRE_THROWS_AS(io::load_curvature(path.string(), ArchSpec{{2, 4, 2}, Activation::Tanh}), std::runtime_error);
    std::filesystem::remove(path);
}
