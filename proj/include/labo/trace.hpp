// Append-only JSONL persistence for search traces: a header line carrying
// the full search config, then one evaluation record per line.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "labo/bo.hpp"

namespace labo::trace {

inline constexpr int kFormatVersion = 1;

using Json = nlohmann::ordered_json;

struct TraceHeader {
    std::string method;  // "bo" or "random"
    SearchConfig config;
};

struct Trace {
    TraceHeader header;
    std::vector<EvaluationRecord> records;
};

inline Json to_json(const SearchConfig& cfg) {
    Json j;
    j["bounds"] = cfg.bounds;
    j["budget"] = cfg.budget;
    j["n_init"] = cfg.n_init;
    j["candidate_count"] = cfg.candidate_count;
    j["beta"] = cfg.beta;
    j["kappa"] = cfg.kappa;
    j["xi"] = cfg.xi;
    j["seed"] = cfg.seed;
    j["eval_seed"] = cfg.eval_seed;
    return j;
}

inline SearchConfig search_config_from_json(const Json& j) {
    SearchConfig cfg;
    for (const auto& b : j.at("bounds")) cfg.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    cfg.budget = j.at("budget").get<std::size_t>();
    cfg.n_init = j.at("n_init").get<std::size_t>();
    cfg.candidate_count = j.at("candidate_count").get<std::size_t>();
    cfg.beta = j.at("beta").get<double>();
    cfg.kappa = j.at("kappa").get<double>();
    cfg.xi = j.at("xi").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.eval_seed = j.at("eval_seed").get<std::uint64_t>();
    return cfg;
}

inline Json to_json(const EvaluationRecord& rec) {
    Json j;
    j["iteration"] = rec.iteration;
    j["point"] = rec.point;
    j["acquisition"] = to_string(rec.chosen);
    j["accuracy_pct"] = rec.accuracy_pct;
    j["ece_pct"] = rec.ece_pct;
    j["cost"] = rec.cost;
    j["eval_seed"] = rec.eval_seed;
    return j;
}

inline EvaluationRecord record_from_json(const Json& j) {
    EvaluationRecord rec;
    rec.iteration = j.at("iteration").get<std::size_t>();
    rec.point = j.at("point").get<SearchPoint>();
    rec.chosen = acq_choice_from_string(j.at("acquisition").get<std::string>());
    rec.accuracy_pct = j.at("accuracy_pct").get<double>();
    rec.ece_pct = j.at("ece_pct").get<double>();
    rec.cost = j.at("cost").get<double>();
    rec.eval_seed = j.at("eval_seed").get<std::uint64_t>();
    return rec;
}

inline void save(const std::string& path, const std::string& method, const SearchConfig& cfg,
                 const std::vector<EvaluationRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    Json header;
    header["format_version"] = kFormatVersion;
    header["type"] = "search_config";
    header["method"] = method;
    header["config"] = to_json(cfg);
    os << header.dump() << '\n';
    for (const auto& rec : records) os << to_json(rec).dump() << '\n';
}

inline Trace load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path + ": empty trace");
    const Json header = Json::parse(line);
    if (header.at("format_version").get<int>() != kFormatVersion)
        throw std::runtime_error(path + ": unsupported trace format version");
    if (header.at("type").get<std::string>() != "search_config")
        throw std::runtime_error(path + ": missing search_config header");
    Trace t;
    t.header.method = header.at("method").get<std::string>();
    t.header.config = search_config_from_json(header.at("config"));
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        t.records.push_back(record_from_json(Json::parse(line)));
    }
    return t;
}

}  // namespace labo::trace
