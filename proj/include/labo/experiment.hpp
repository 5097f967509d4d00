// End-to-end experiment driver: dataset generation, training, curvature
// caching, the hyperparameter-evaluation objective, paired BO/random-search
// runs over repetitions, and plot-ready summary CSVs. Every stage is seeded
// from the config file alone, so a full experiment is reproducible bit for
// bit from that one file.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "labo/bo.hpp"
#include "labo/curvature.hpp"
#include "labo/data.hpp"
#include "labo/io.hpp"
#include "labo/laplace.hpp"
#include "labo/metrics.hpp"
#include "labo/nn.hpp"
#include "labo/trace.hpp"

namespace labo {

enum class GroupLayout { Single, PerLayer, HiddenFinal };
enum class DatasetKind { TwoMoons, GaussianBlobs, Csv, Idx };

inline std::string to_string(GroupLayout g) {
    switch (g) {
        case GroupLayout::Single: return "single";
        case GroupLayout::PerLayer: return "per_layer";
        case GroupLayout::HiddenFinal: return "hidden_final";
    }
    throw std::logic_error("unknown group layout");
}

inline GroupLayout group_layout_from_string(const std::string& s) {
    if (s == "single") return GroupLayout::Single;
    if (s == "per_layer") return GroupLayout::PerLayer;
    if (s == "hidden_final") return GroupLayout::HiddenFinal;
    throw std::invalid_argument("unknown group layout: " + s);
}

/// Layer index sets for a layout over a network with `layer_count` layers.
inline std::vector<std::vector<std::size_t>> group_layers(GroupLayout layout, std::size_t layer_count) {
    if (layer_count == 0) throw std::invalid_argument("group_layers: no layers");
    std::vector<std::vector<std::size_t>> sets;
    switch (layout) {
        case GroupLayout::Single: {
            sets.emplace_back();
            for (std::size_t l = 0; l < layer_count; ++l) sets[0].push_back(l);
            break;
        }
        case GroupLayout::PerLayer: {
            for (std::size_t l = 0; l < layer_count; ++l) sets.push_back({l});
            break;
        }
        case GroupLayout::HiddenFinal: {
            if (layer_count < 2) throw std::invalid_argument("hidden_final layout needs at least two layers");
            sets.emplace_back();
            for (std::size_t l = 0; l + 1 < layer_count; ++l) sets[0].push_back(l);
            sets.push_back({layer_count - 1});
            break;
        }
    }
    return sets;
}

struct ExperimentConfig {
    // dataset
    DatasetKind dataset_kind = DatasetKind::TwoMoons;
    std::size_t n_train = 2000;
    std::size_t n_val = 1000;
    std::size_t n_test = 0;  // optional untouched split
    double noise = 0.1;
    std::size_t classes = 2;      // blobs only
    double separation = 5.0;      // blobs only
    std::uint64_t data_seed = 20240901;
    std::string csv_train;  // kind = csv only
    std::string csv_val;
    std::string csv_test;
    std::string idx_train_images;  // kind = idx only (flattened-pixel reader)
    std::string idx_train_labels;
    std::string idx_val_images;
    std::string idx_val_labels;

    // network & training. The reference classifier is deliberately trained
    // short and hot: the boundary is still crude while the logits are already
    // saturated, giving the overconfident starting point the posterior
    // sampling is meant to repair. Longer schedules solve two moons almost
    // perfectly and leave no miscalibration to remove.
    ArchSpec arch{{2, 32, 32, 2}, Activation::Tanh};
    std::size_t epochs = 3;
    double lr = 1.0;
    std::size_t batch_size = 16;
    std::uint64_t train_seed = 3;

    // posterior evaluation
    GroupLayout layout = GroupLayout::Single;
    std::size_t t_samples = 30;
    std::size_t m_bins = 15;

    // search (bounds are per group: log10 n then log10 tau). The tau range
    // stops at 10: beyond that the posterior collapses to the deterministic
    // network and the cost surface flattens into baseline +- sampling noise,
    // which hides the basin the search is supposed to find.
    std::array<double, 2> log_n_bounds{0.0, 4.0};
    std::array<double, 2> log_tau_bounds{-4.0, 1.0};
    std::size_t budget = 50;
    std::size_t n_init = 5;
    std::size_t candidate_count = 2048;
    double beta = 0.9;
    double kappa = 2.0;
    double xi = 0.01;

    std::size_t repetitions = 10;
    std::uint64_t master_seed = 99;
    std::string out_dir = "runs/two_moons";

    std::size_t group_count() const { return group_layers(layout, arch.layer_count()).size(); }

    SearchConfig search_config() const {
        SearchConfig cfg;
        for (std::size_t g = 0; g < group_count(); ++g) {
            cfg.bounds.push_back(log_n_bounds);
            cfg.bounds.push_back(log_tau_bounds);
        }
        cfg.budget = budget;
        cfg.n_init = n_init;
        cfg.candidate_count = candidate_count;
        cfg.beta = beta;
        cfg.kappa = kappa;
        cfg.xi = xi;
        return cfg;
    }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

inline std::array<double, 2> parse_interval(const std::string& v, const std::string& key) {
    const auto parts = split(v, ',');
    if (parts.size() != 2) throw std::invalid_argument("config: " + key + " wants 'lo,hi'");
    return {std::stod(parts[0]), std::stod(parts[1])};
}

}  // namespace config_detail

/// Parses the flat dotted-key config format. Every key has a default;
/// unknown keys are rejected. Lines starting with '#' are comments.
inline ExperimentConfig parse_config_text(const std::string& text) {
    using config_detail::parse_interval;
    using config_detail::split;
    using config_detail::trim;
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "format_version") {
            if (value != "1") throw std::invalid_argument("config: unsupported format_version " + value);
        } else if (key == "dataset.kind") {
            if (value == "two_moons") cfg.dataset_kind = DatasetKind::TwoMoons;
            else if (value == "gaussian_blobs") cfg.dataset_kind = DatasetKind::GaussianBlobs;
            else if (value == "csv") cfg.dataset_kind = DatasetKind::Csv;
            else if (value == "idx") cfg.dataset_kind = DatasetKind::Idx;
            else throw std::invalid_argument("config: unknown dataset.kind " + value);
        } else if (key == "dataset.n_train") cfg.n_train = std::stoull(value);
        else if (key == "dataset.n_val") cfg.n_val = std::stoull(value);
        else if (key == "dataset.n_test") cfg.n_test = std::stoull(value);
        else if (key == "dataset.noise") cfg.noise = std::stod(value);
        else if (key == "dataset.classes") cfg.classes = std::stoull(value);
        else if (key == "dataset.separation") cfg.separation = std::stod(value);
        else if (key == "dataset.seed") cfg.data_seed = std::stoull(value);
        else if (key == "dataset.csv_train") cfg.csv_train = value;
        else if (key == "dataset.csv_val") cfg.csv_val = value;
        else if (key == "dataset.csv_test") cfg.csv_test = value;
        else if (key == "dataset.idx_train_images") cfg.idx_train_images = value;
        else if (key == "dataset.idx_train_labels") cfg.idx_train_labels = value;
        else if (key == "dataset.idx_val_images") cfg.idx_val_images = value;
        else if (key == "dataset.idx_val_labels") cfg.idx_val_labels = value;
        else if (key == "arch.layers") {
            cfg.arch.layer_sizes.clear();
            for (const auto& part : split(value, ',')) cfg.arch.layer_sizes.push_back(std::stoull(part));
            cfg.arch.validate();
        } else if (key == "arch.activation") cfg.arch.activation = activation_from_string(value);
        else if (key == "train.epochs") cfg.epochs = std::stoull(value);
        else if (key == "train.lr") cfg.lr = std::stod(value);
        else if (key == "train.batch_size") cfg.batch_size = std::stoull(value);
        else if (key == "train.seed") cfg.train_seed = std::stoull(value);
        else if (key == "groups.layout") cfg.layout = group_layout_from_string(value);
        else if (key == "laplace.samples") cfg.t_samples = std::stoull(value);
        else if (key == "metrics.bins") cfg.m_bins = std::stoull(value);
        else if (key == "search.budget") cfg.budget = std::stoull(value);
        else if (key == "search.n_init") cfg.n_init = std::stoull(value);
        else if (key == "search.candidates") cfg.candidate_count = std::stoull(value);
        else if (key == "search.beta") cfg.beta = std::stod(value);
        else if (key == "search.kappa") cfg.kappa = std::stod(value);
        else if (key == "search.xi") cfg.xi = std::stod(value);
        else if (key == "search.log_n_bounds") cfg.log_n_bounds = parse_interval(value, key);
        else if (key == "search.log_tau_bounds") cfg.log_tau_bounds = parse_interval(value, key);
        else if (key == "experiment.repetitions") cfg.repetitions = std::stoull(value);
        else if (key == "experiment.seed") cfg.master_seed = std::stoull(value);
        else if (key == "output.dir") cfg.out_dir = value;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

/// Everything a single objective evaluation needs, assembled once per run.
struct EvalContext {
    const Network* net = nullptr;
    const DiagonalCurvature* curvature = nullptr;
    const Dataset* eval_split = nullptr;
    std::vector<std::vector<std::size_t>> layer_sets;
    std::size_t t_samples = 30;
    std::size_t m_bins = 15;
};

/// Decodes a search point (log10 values, group-major n then tau) into
/// hyperparameter groups.
inline std::vector<HyperGroup> point_to_groups(const SearchPoint& point,
                                               const std::vector<std::vector<std::size_t>>& layer_sets) {
    if (point.size() != 2 * layer_sets.size())
        throw std::invalid_argument("point dimension does not match group layout");
    std::vector<HyperGroup> groups;
    for (std::size_t g = 0; g < layer_sets.size(); ++g) {
        HyperGroup hg;
        hg.layer_indices = layer_sets[g];
        hg.n_value = std::pow(10.0, point[2 * g]);
        hg.tau_value = std::pow(10.0, point[2 * g + 1]);
        groups.push_back(std::move(hg));
    }
    return groups;
}

inline LaplacePosterior posterior_at(const EvalContext& ctx, const SearchPoint& point) {
    const auto groups = point_to_groups(point, ctx.layer_sets);
    LaplacePosterior post{*ctx.net, regularize(*ctx.curvature, groups), groups};
    post.validate();
    return post;
}

inline PredictiveResult predictive_at(const EvalContext& ctx, const SearchPoint& point, std::uint64_t eval_seed) {
    return predict_mc(posterior_at(ctx, point), ctx.eval_split->inputs, ctx.t_samples, eval_seed);
}

/// The black-box objective: point -> posterior -> MC predictive on the
/// evaluation split -> score. Shares the evaluation seed across points.
inline ScoreReport score_point(const EvalContext& ctx, const SearchPoint& point, std::uint64_t eval_seed) {
    const auto pred = predictive_at(ctx, point, eval_seed);
    return score(pred.probs, ctx.eval_split->labels, ctx.m_bins);
}

inline ObjectiveValue evaluate_point(const EvalContext& ctx, const SearchPoint& point, std::uint64_t eval_seed) {
    const ScoreReport rep = score_point(ctx, point, eval_seed);
    return ObjectiveValue{rep.accuracy_pct, rep.ece_pct};
}

/// Deterministic forward pass of the trained network, scored on a split.
inline ScoreReport baseline_score(const Network& net, const Dataset& split, std::size_t m_bins) {
    return score(forward_batch(net, split.inputs), split.labels, m_bins);
}

// ---------------------------------------------------------------------------
// Run orchestration: file layout inside the output directory.

struct RunArtifact {
    std::string dir;
    std::string train_csv, val_csv, test_csv;
    std::string network_path;
    std::string curvature_path;
    std::vector<std::string> bo_traces;
    std::vector<std::string> random_traces;
    std::vector<std::string> summary_paths;
};

enum class RunMethod { Both, BoOnly, RandomOnly };

inline RunMethod run_method_from_string(const std::string& s) {
    if (s == "both") return RunMethod::Both;
    if (s == "bo") return RunMethod::BoOnly;
    if (s == "random") return RunMethod::RandomOnly;
    throw std::invalid_argument("unknown search method: " + s);
}

namespace run_detail {

inline std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline std::string trace_name(const std::string& method, std::size_t rep) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "trace_%s_rep%03zu.jsonl", method.c_str(), rep);
    return buf;
}

// Per-repetition seed block: one eval seed shared by both methods (paired
// comparison), separate proposal seeds per method.
struct RepSeeds {
    std::uint64_t eval_seed;
    std::uint64_t bo_seed;
    std::uint64_t random_seed;
};

inline RepSeeds rep_seeds(std::uint64_t master_seed, std::size_t rep) {
    const std::uint64_t rep_seed = rng::mix(master_seed, 1000 + rep);
    return {rng::mix(rep_seed, 0), rng::mix(rep_seed, 1), rng::mix(rep_seed, 2)};
}

}  // namespace run_detail

/// Generates (or loads, for kind = csv) the dataset splits, writing the CSVs
/// into the output directory. Train, validation and optional test splits use
/// sub-seeds 0, 1, 2 of the dataset seed.
struct DataSplits {
    Dataset train;
    Dataset val;
    std::optional<Dataset> test;
};

inline DataSplits make_splits(const ExperimentConfig& cfg) {
    DataSplits s;
    switch (cfg.dataset_kind) {
        case DatasetKind::TwoMoons:
        case DatasetKind::GaussianBlobs: {
            if (cfg.n_train < 10 || cfg.n_val < 10)
                throw std::invalid_argument("generated splits need at least 10 samples each");
            const auto gen = [&cfg](std::size_t n, std::uint64_t seed) {
                return cfg.dataset_kind == DatasetKind::TwoMoons
                           ? data::make_two_moons(n, cfg.noise, seed)
                           : data::make_blobs(n, cfg.classes, cfg.separation, cfg.noise, seed);
            };
            s.train = gen(cfg.n_train, rng::mix(cfg.data_seed, 0));
            s.val = gen(cfg.n_val, rng::mix(cfg.data_seed, 1));
            if (cfg.n_test > 0) s.test = gen(cfg.n_test, rng::mix(cfg.data_seed, 2));
            break;
        }
        case DatasetKind::Csv:
            if (cfg.csv_train.empty() || cfg.csv_val.empty())
                throw std::invalid_argument("dataset.kind = csv needs dataset.csv_train and dataset.csv_val");
            s.train = data::load_csv(cfg.csv_train);
            s.val = data::load_csv(cfg.csv_val);
            if (!cfg.csv_test.empty()) s.test = data::load_csv(cfg.csv_test);
            break;
        case DatasetKind::Idx:
            if (cfg.idx_train_images.empty() || cfg.idx_train_labels.empty() || cfg.idx_val_images.empty() ||
                cfg.idx_val_labels.empty())
                throw std::invalid_argument("dataset.kind = idx needs the four dataset.idx_* paths");
            s.train = data::load_idx(cfg.idx_train_images, cfg.idx_train_labels);
            s.val = data::load_idx(cfg.idx_val_images, cfg.idx_val_labels);
            break;
    }
    return s;
}

/// Writes the split CSVs into the output directory (gen-data stage).
inline RunArtifact write_dataset(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const DataSplits s = make_splits(cfg);
    RunArtifact art;
    art.dir = cfg.out_dir;
    art.train_csv = run_detail::join(cfg.out_dir, "train.csv");
    art.val_csv = run_detail::join(cfg.out_dir, "val.csv");
    data::save_csv(art.train_csv, s.train);
    data::save_csv(art.val_csv, s.val);
    if (s.test) {
        art.test_csv = run_detail::join(cfg.out_dir, "test.csv");
        data::save_csv(art.test_csv, *s.test);
    }
    return art;
}

namespace run_detail {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(name + ": " + e.what());
    }
}

inline Dataset load_split(const std::string& path, const std::string& stage_name) {
    return stage(stage_name, [&] { return data::load_csv(path); });
}

}  // namespace run_detail

/// Loads the split CSVs from the output directory, generating them first if
/// they are missing.
inline DataSplits ensure_dataset(const ExperimentConfig& cfg) {
    const std::string train_csv = run_detail::join(cfg.out_dir, "train.csv");
    if (!std::filesystem::exists(train_csv)) write_dataset(cfg);
    DataSplits s;
    s.train = run_detail::load_split(train_csv, "gen-data");
    s.val = run_detail::load_split(run_detail::join(cfg.out_dir, "val.csv"), "gen-data");
    const std::string test_csv = run_detail::join(cfg.out_dir, "test.csv");
    if (std::filesystem::exists(test_csv)) s.test = run_detail::load_split(test_csv, "gen-data");
    return s;
}

/// Trains the classifier (train stage), or loads the cached network file.
inline Network ensure_network(const ExperimentConfig& cfg, const Dataset& train) {
    const std::string path = run_detail::join(cfg.out_dir, "network.bin");
    if (std::filesystem::exists(path)) {
        Network net = io::load_network(path);
        if (!(net.arch == cfg.arch))
            throw std::runtime_error("train: cached " + path +
                                     " was built for a different architecture; delete it or change output.dir");
        return net;
    }
    return run_detail::stage("train", [&] {
        const Network net =
            train_sgd(init_network(cfg.arch, cfg.train_seed), train, cfg.epochs, cfg.lr, cfg.batch_size, cfg.train_seed);
        std::filesystem::create_directories(cfg.out_dir);
        io::save_network(path, net);
        return net;
    });
}

/// Computes the curvature diagonal on the training split (curvature stage),
/// or loads the cached file if it matches the architecture.
inline DiagonalCurvature ensure_curvature(const ExperimentConfig& cfg, const Network& net, const Dataset& train) {
    const std::string path = run_detail::join(cfg.out_dir, "curvature.bin");
    if (std::filesystem::exists(path)) return DiagonalCurvature{io::load_curvature(path, net.arch)};
    return run_detail::stage("curvature", [&] {
        DiagonalCurvature curv = diagonal_fisher(net, train);
        io::save_curvature(path, net.arch, curv.diag);
        return curv;
    });
}

// ---------------------------------------------------------------------------
// Summary CSV emission (report stage).

namespace report_detail {

struct MethodTraces {
    std::vector<trace::Trace> traces;  // one per repetition, in path order
};

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double pop_std_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline const EvaluationRecord& best_record(const trace::Trace& t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.records.size(); ++i)
        if (t.records[i].cost < t.records[best].cost) best = i;
    return t.records[best];
}

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "# format_version=1\n";
    return os;
}

inline void append_num(std::string& row, double v) { row += format_double(v); }

}  // namespace report_detail

/// Summarizes persisted traces into plot-ready CSVs:
///   best_so_far.csv          running-minimum cost per iteration, mean/std over reps
///   samples.csv              every evaluated point with its metrics
///   final_table.csv          baseline vs best-found per method, per split
///   reliability_baseline.csv confidence bins of the deterministic network
///   reliability_best.csv     confidence bins of the overall best posterior
/// Traces that fail to parse are reported and skipped; the rest are processed.
/// The reliability and test-split outputs need the run artifacts (network,
/// curvature, splits); they are skipped with a warning when those are absent.
inline std::vector<std::string> write_report(const ExperimentConfig& cfg, const std::vector<std::string>& trace_paths) {
    namespace rd = report_detail;
    std::map<std::string, rd::MethodTraces> by_method;
    for (const auto& path : trace_paths) {
        try {
            trace::Trace t = trace::load(path);
            by_method[t.header.method].traces.push_back(std::move(t));
        } catch (const std::exception& e) {
            std::cerr << "report: skipping " << path << ": " << e.what() << "\n";
        }
    }
    if (by_method.empty()) throw std::runtime_error("report: no readable traces");

    std::vector<std::string> written;
    std::filesystem::create_directories(cfg.out_dir);

    // (a) best-so-far curves, mean and population std across repetitions
    {
        const std::string path = run_detail::join(cfg.out_dir, "best_so_far.csv");
        auto os = rd::open_csv(path);
        os << "method,iteration,best_cost_mean,best_cost_std,repetitions\n";
        for (const auto& [method, mt] : by_method) {
            std::size_t iters = 0;
            for (const auto& t : mt.traces) iters = std::max(iters, t.records.size());
            std::vector<std::vector<double>> curves;
            for (const auto& t : mt.traces) curves.push_back(best_so_far(t.records));
            for (std::size_t i = 0; i < iters; ++i) {
                std::vector<double> at;
                for (const auto& c : curves)
                    if (i < c.size()) at.push_back(c[i]);
                std::string row = method + "," + std::to_string(i) + ",";
                rd::append_num(row, rd::mean_of(at));
                row += ",";
                rd::append_num(row, rd::pop_std_of(at));
                row += "," + std::to_string(at.size()) + "\n";
                os << row;
            }
        }
        written.push_back(path);
    }

    // (b) every sampled point with its cost
    {
        const std::string path = run_detail::join(cfg.out_dir, "samples.csv");
        auto os = rd::open_csv(path);
        std::size_t dims = 0;
        for (const auto& [method, mt] : by_method)
            for (const auto& t : mt.traces)
                if (!t.records.empty()) dims = std::max(dims, t.records.front().point.size());
        os << "method,repetition,iteration,acquisition";
        for (std::size_t d = 0; d < dims; ++d) os << ",p" << d;
        os << ",accuracy_pct,ece_pct,cost\n";
        for (const auto& [method, mt] : by_method) {
            for (std::size_t rep = 0; rep < mt.traces.size(); ++rep) {
                for (const auto& r : mt.traces[rep].records) {
                    std::string row = method + "," + std::to_string(rep) + "," + std::to_string(r.iteration) + "," +
                                      to_string(r.chosen);
                    for (std::size_t d = 0; d < dims; ++d) {
                        row += ",";
                        rd::append_num(row, d < r.point.size() ? r.point[d] : std::nan(""));
                    }
                    row += ",";
                    rd::append_num(row, r.accuracy_pct);
                    row += ",";
                    rd::append_num(row, r.ece_pct);
                    row += ",";
                    rd::append_num(row, r.cost);
                    row += "\n";
                    os << row;
                }
            }
        }
        written.push_back(path);
    }

    // Parts below need the run artifacts next to the traces.
    std::optional<DataSplits> splits;
    std::optional<Network> net;
    std::optional<DiagonalCurvature> curv;
    try {
        splits = ensure_dataset(cfg);
        net = io::load_network(run_detail::join(cfg.out_dir, "network.bin"));
        curv = DiagonalCurvature{io::load_curvature(run_detail::join(cfg.out_dir, "curvature.bin"), net->arch)};
    } catch (const std::exception& e) {
        std::cerr << "report: run artifacts unavailable (" << e.what()
                  << "); final_table and reliability outputs skipped\n";
    }

    if (splits && net && curv) {
        EvalContext val_ctx{&*net, &*curv, &splits->val, group_layers(cfg.layout, net->layer_count()), cfg.t_samples,
                            cfg.m_bins};

        // (c) final accuracy/ECE table: baseline vs best-found per method
        {
            const std::string path = run_detail::join(cfg.out_dir, "final_table.csv");
            auto os = rd::open_csv(path);
            os << "split,method,accuracy_pct_mean,accuracy_pct_std,ece_pct_mean,ece_pct_std,cost_mean,cost_std,"
                  "repetitions\n";
            auto emit = [&](const std::string& split, const std::string& method, const std::vector<double>& acc,
                            const std::vector<double>& ece, const std::vector<double>& cost) {
                std::string row = split + "," + method + ",";
                rd::append_num(row, rd::mean_of(acc));
                row += ",";
                rd::append_num(row, rd::pop_std_of(acc));
                row += ",";
                rd::append_num(row, rd::mean_of(ece));
                row += ",";
                rd::append_num(row, rd::pop_std_of(ece));
                row += ",";
                rd::append_num(row, rd::mean_of(cost));
                row += ",";
                rd::append_num(row, rd::pop_std_of(cost));
                row += "," + std::to_string(acc.size()) + "\n";
                os << row;
            };
            auto emit_split = [&](const std::string& split_name, const Dataset& split_data) {
                const ScoreReport base = baseline_score(*net, split_data, cfg.m_bins);
                emit(split_name, "baseline", {base.accuracy_pct}, {base.ece_pct}, {base.cost});
                EvalContext ctx{&*net, &*curv, &split_data, val_ctx.layer_sets, cfg.t_samples, cfg.m_bins};
                for (const auto& [method, mt] : by_method) {
                    std::vector<double> acc, ece, cost;
                    for (const auto& t : mt.traces) {
                        const auto& best = rd::best_record(t);
                        if (&split_data == &splits->val) {
                            acc.push_back(best.accuracy_pct);
                            ece.push_back(best.ece_pct);
                            cost.push_back(best.cost);
                        } else {
                            const ScoreReport r = score_point(ctx, best.point, best.eval_seed);
                            acc.push_back(r.accuracy_pct);
                            ece.push_back(r.ece_pct);
                            cost.push_back(r.cost);
                        }
                    }
                    emit(split_name, "la_" + method, acc, ece, cost);
                }
            };
            emit_split("val", splits->val);
            if (splits->test) emit_split("test", *splits->test);
            written.push_back(path);
        }

        // (d) reliability bins for the baseline and the overall best posterior
        {
            const std::string base_path = run_detail::join(cfg.out_dir, "reliability_baseline.csv");
            std::ofstream os(base_path, std::ios::binary);
            os << to_csv(reliability(forward_batch(*net, splits->val.inputs), splits->val.labels, cfg.m_bins));
            written.push_back(base_path);

            const EvaluationRecord* overall = nullptr;
            for (const auto& [method, mt] : by_method)
                for (const auto& t : mt.traces) {
                    const auto& best = rd::best_record(t);
                    if (overall == nullptr || best.cost < overall->cost) overall = &best;
                }
            if (overall != nullptr) {
                const auto pred = predictive_at(val_ctx, overall->point, overall->eval_seed);
                const std::string best_path = run_detail::join(cfg.out_dir, "reliability_best.csv");
                std::ofstream bos(best_path, std::ios::binary);
                bos << to_csv(reliability(pred.probs, splits->val.labels, cfg.m_bins));
                written.push_back(best_path);
            }
        }
    }
    return written;
}

/// Full pipeline: splits, trained network, curvature cache, then paired
/// searches for every repetition, traces on disk, and the summary CSVs.
/// Within a repetition both methods share one evaluation seed, so the
/// comparison is paired; proposal streams are independent per method.
inline RunArtifact run_experiment(const ExperimentConfig& cfg, RunMethod method = RunMethod::Both) {
    RunArtifact art;
    art.dir = cfg.out_dir;
    std::filesystem::create_directories(cfg.out_dir);

    const DataSplits splits = ensure_dataset(cfg);
    art.train_csv = run_detail::join(cfg.out_dir, "train.csv");
    art.val_csv = run_detail::join(cfg.out_dir, "val.csv");
    if (splits.test) art.test_csv = run_detail::join(cfg.out_dir, "test.csv");

    const Network net = ensure_network(cfg, splits.train);
    art.network_path = run_detail::join(cfg.out_dir, "network.bin");
    const DiagonalCurvature curv = ensure_curvature(cfg, net, splits.train);
    art.curvature_path = run_detail::join(cfg.out_dir, "curvature.bin");

    const EvalContext ctx{&net, &curv, &splits.val, group_layers(cfg.layout, net.layer_count()), cfg.t_samples,
                          cfg.m_bins};
    const Objective objective = [&ctx](const SearchPoint& p, std::uint64_t eval_seed, std::size_t) {
        return evaluate_point(ctx, p, eval_seed);
    };

    const SearchConfig base_cfg = cfg.search_config();
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const auto seeds = run_detail::rep_seeds(cfg.master_seed, rep);
        if (method != RunMethod::RandomOnly) {
            SearchConfig sc = base_cfg;
            sc.seed = seeds.bo_seed;
            sc.eval_seed = seeds.eval_seed;
            const auto records = run_detail::stage("search", [&] { return bo_search(objective, sc); });
            const std::string path = run_detail::join(cfg.out_dir, run_detail::trace_name("bo", rep));
            trace::save(path, "bo", sc, records);
            art.bo_traces.push_back(path);
        }
        if (method != RunMethod::BoOnly) {
            SearchConfig sc = base_cfg;
            sc.seed = seeds.random_seed;
            sc.eval_seed = seeds.eval_seed;
            const auto records = run_detail::stage("search", [&] { return random_search(objective, sc); });
            const std::string path = run_detail::join(cfg.out_dir, run_detail::trace_name("random", rep));
            trace::save(path, "random", sc, records);
            art.random_traces.push_back(path);
        }
    }

    std::vector<std::string> all_traces = art.bo_traces;
    all_traces.insert(all_traces.end(), art.random_traces.begin(), art.random_traces.end());
    // pick up traces from a previous run of the other method, so summaries pair
    for (const auto& entry : std::filesystem::directory_iterator(cfg.out_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".jsonl" &&
            std::find(all_traces.begin(), all_traces.end(), entry.path().string()) == all_traces.end())
            all_traces.push_back(entry.path().string());
    }
    std::sort(all_traces.begin(), all_traces.end());
    art.summary_paths = run_detail::stage("report", [&] { return write_report(cfg, all_traces); });
    return art;
}

}  // namespace labo
