// Command-line driver for the calibration-search pipeline.
//
//   labo gen-data   --config cfg        write train/val[/test] CSV splits
//   labo train      --config cfg        train and cache the classifier
//   labo curvature  --config cfg        cache the curvature diagonal
//   labo eval-point --config cfg -p ... score one hyperparameter point
//   labo search     --config cfg        run the searches and summarize
//   labo report     --config cfg [...]  re-summarize persisted traces
//
// --seed and --out override the config's experiment seed and output dir.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "labo/experiment.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
};

void add_global_flags(CLI::App* cmd, GlobalArgs& g) {
    cmd->add_option("--config", g.config_path, "experiment config file")->required();
    cmd->add_option("--seed", g.seed, "override experiment.seed")->each([&](const std::string&) { g.seed_set = true; });
    cmd->add_option("--out", g.out_dir, "override output.dir");
}

labo::ExperimentConfig load_config(const GlobalArgs& g) {
    labo::ExperimentConfig cfg = labo::parse_config(g.config_path);
    if (g.seed_set) cfg.master_seed = g.seed;
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    return cfg;
}

void print_score(const std::string& label, const labo::ScoreReport& r) {
    std::printf("%s: accuracy %.4f%%  ece %.4f%%  nll %.6f  cost %.4f\n", label.c_str(), r.accuracy_pct, r.ece_pct,
                r.nll, r.cost);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplace-posterior calibration with portfolio Bayesian optimization"};
    app.require_subcommand(1);

    GlobalArgs gen_args, train_args, curv_args, eval_args, search_args, report_args;

    auto* gen = app.add_subcommand("gen-data", "generate dataset splits");
    add_global_flags(gen, gen_args);

    auto* train = app.add_subcommand("train", "train the classifier and cache it");
    add_global_flags(train, train_args);

    auto* curvature = app.add_subcommand("curvature", "compute and cache the curvature diagonal");
    add_global_flags(curvature, curv_args);

    auto* eval = app.add_subcommand("eval-point", "evaluate one search point");
    add_global_flags(eval, eval_args);
    std::vector<double> point;
    eval->add_option("-p,--point", point, "log10 coordinates (n_1 tau_1 n_2 tau_2 ...)")->required();
    std::uint64_t eval_seed = 0;
    eval->add_option("--eval-seed", eval_seed, "evaluation seed (default: repetition 0's)");
    std::string probs_out;
    eval->add_option("--probs-out", probs_out, "also write the per-row predictive probabilities as CSV");

    auto* search = app.add_subcommand("search", "run the hyperparameter searches");
    add_global_flags(search, search_args);
    std::string method = "both";
    search->add_option("--method", method, "bo | random | both")->check(CLI::IsMember({"bo", "random", "both"}));

    auto* report = app.add_subcommand("report", "summarize persisted traces into CSVs");
    add_global_flags(report, report_args);
    std::vector<std::string> trace_paths;
    report->add_option("traces", trace_paths, "trace files (default: all in output dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto cfg = load_config(gen_args);
            const auto art = labo::write_dataset(cfg);
            std::printf("wrote %s\n", art.train_csv.c_str());
            std::printf("wrote %s\n", art.val_csv.c_str());
            if (!art.test_csv.empty()) std::printf("wrote %s\n", art.test_csv.c_str());
        } else if (train->parsed()) {
            const auto cfg = load_config(train_args);
            const auto splits = labo::ensure_dataset(cfg);
            const auto net = labo::ensure_network(cfg, splits.train);
            print_score("train split", labo::baseline_score(net, splits.train, cfg.m_bins));
            print_score("val split", labo::baseline_score(net, splits.val, cfg.m_bins));
            std::printf("network cached in %s\n", cfg.out_dir.c_str());
        } else if (curvature->parsed()) {
            const auto cfg = load_config(curv_args);
            const auto splits = labo::ensure_dataset(cfg);
            const auto net = labo::ensure_network(cfg, splits.train);
            labo::ensure_curvature(cfg, net, splits.train);
            std::printf("curvature cached in %s\n", cfg.out_dir.c_str());
        } else if (eval->parsed()) {
            const auto cfg = load_config(eval_args);
            const auto splits = labo::ensure_dataset(cfg);
            const auto net = labo::ensure_network(cfg, splits.train);
            const auto curv = labo::ensure_curvature(cfg, net, splits.train);
            const labo::EvalContext ctx{&net,        &curv,      &splits.val, labo::group_layers(cfg.layout, net.layer_count()),
                                        cfg.t_samples, cfg.m_bins};
            if (!eval->count("--eval-seed")) eval_seed = labo::rng::mix(labo::rng::mix(cfg.master_seed, 1000), 0);
            const auto rep = labo::score_point(ctx, point, eval_seed);
            labo::EvaluationRecord rec{0, point, labo::AcqChoice::Init, rep.accuracy_pct, rep.ece_pct,
                                       (100.0 - rep.accuracy_pct) + rep.ece_pct, eval_seed};
            std::cout << labo::trace::to_json(rec).dump() << "\n";
            if (!probs_out.empty()) {
                const auto pred = labo::predictive_at(ctx, point, eval_seed);
                std::ofstream os(probs_out, std::ios::binary);
                if (!os) throw std::runtime_error("cannot write " + probs_out);
                os << "# format_version=1\n";
                for (std::size_t k = 0; k < pred.probs.cols; ++k) os << (k ? ",p" : "p") << k;
                os << "\n";
                for (std::size_t i = 0; i < pred.probs.rows; ++i) {
                    for (std::size_t k = 0; k < pred.probs.cols; ++k)
                        os << (k ? "," : "") << labo::format_double(pred.probs(i, k));
                    os << "\n";
                }
                std::printf("wrote %s\n", probs_out.c_str());
            }
        } else if (search->parsed()) {
            const auto cfg = load_config(search_args);
            const auto art = labo::run_experiment(cfg, labo::run_method_from_string(method));
            std::printf("traces: %zu bo, %zu random\n", art.bo_traces.size(), art.random_traces.size());
            for (const auto& p : art.summary_paths) std::printf("wrote %s\n", p.c_str());
        } else if (report->parsed()) {
            const auto cfg = load_config(report_args);
            if (trace_paths.empty()) {
                for (const auto& entry : std::filesystem::directory_iterator(cfg.out_dir)) {
                    const std::string name = entry.path().filename().string();
                    if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".jsonl")
                        trace_paths.push_back(entry.path().string());
                }
                std::sort(trace_paths.begin(), trace_paths.end());
            }
            for (const auto& p : labo::write_report(cfg, trace_paths)) std::printf("wrote %s\n", p.c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
