#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "slearn/engine.hpp"
#include "slearn/graph.hpp"
#include "slearn/models.hpp"
#include "slearn/network.hpp"

namespace slearn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Model = std::variant<GaussianModel, CategoricalModel>;

struct ExperimentConfig {
    Graph graph;
    CombinationMatrix matrix;
    Model model;
    Vector alphas;  // size 1 broadcasts
    std::size_t horizon = 2500;
    std::uint64_t seed = 0;
    std::size_t replications = 1;
    Vector prior;  // empty = uniform
    bool record_draws = false;
    bool record_llrs = false;
    std::string output_dir;

    std::size_t agent_count() const { return graph.node_count; }

    const HypothesisSpace& hypotheses() const {
        return std::visit([](const auto& m) -> const HypothesisSpace& { return m.hypotheses(); },
                          model);
    }

    SimConfig sim_config() const {
        SimConfig cfg;
        cfg.alphas = alphas;
        cfg.horizon = horizon;
        cfg.seed = seed;
        cfg.prior = prior;
        cfg.record_draws = record_draws;
        cfg.record_llrs = record_llrs;
        return cfg;
    }

    bool replacement_case() const {
        for (double a : alphas)
            if (a != 0.0) return false;
        return true;
    }
};

namespace config_detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
}

inline Vector parse_alpha(const json& j) {
    Vector alphas;
    if (j.is_number()) {
        alphas.push_back(j.get<double>());
    } else if (j.is_array()) {
        for (const auto& v : j) alphas.push_back(v.get<double>());
        if (alphas.empty()) throw ConfigError("alpha array must not be empty");
    } else {
        throw ConfigError("alpha must be a number or an array of numbers");
    }
    for (double a : alphas)
        if (!(a >= 0.0 && a < 1.0))
            throw ConfigError("alpha must lie in [0,1); 1 is the non-cooperative mode");
    return alphas;
}

inline Graph parse_graph(const json& j) {
    if (!j.is_object()) throw ConfigError("graph must be an object");
    if (j.contains("preset")) {
        reject_unknown_keys(j, {"preset"}, "graph");
        const std::string name = j.at("preset").get<std::string>();
        if (name == "paper-10node") return presets::ten_node_benchmark();
        throw ConfigError("unknown graph preset \"" + name + "\"");
    }
    reject_unknown_keys(j, {"nodes", "edges"}, "graph");
    if (!j.contains("nodes") || !j.contains("edges"))
        throw ConfigError("graph needs \"nodes\" and \"edges\" (or a \"preset\")");
    const std::size_t nodes = j.at("nodes").get<std::size_t>();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("each edge must be a pair of node ids");
        const std::size_t a = e[0].get<std::size_t>(), b = e[1].get<std::size_t>();
        if (a < 1 || b < 1) throw ConfigError("node ids are 1-based");
        edges.push_back({a - 1, b - 1});
    }
    try {
        return Graph::from_edges(nodes, edges);
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("bad graph: ") + ex.what());
    }
}

inline CombinationMatrix parse_matrix(const json& j, const Graph& graph) {
    if (!j.is_object()) throw ConfigError("matrix must be an object");
    reject_unknown_keys(j, {"rule", "values"}, "matrix");
    const std::string rule = j.value("rule", "lazy-metropolis");
    if (rule == "lazy-metropolis") {
        if (j.contains("values")) throw ConfigError("lazy-metropolis takes no explicit values");
        try {
            return lazy_metropolis(graph);
        } catch (const std::exception& ex) {
            throw ConfigError(std::string("bad matrix: ") + ex.what());
        }
    }
    if (rule != "explicit") throw ConfigError("matrix rule must be lazy-metropolis or explicit");
    if (!j.contains("values")) throw ConfigError("explicit matrix needs \"values\"");
    const auto& rows = j.at("values");
    const std::size_t n = graph.node_count;
    if (rows.size() != n) throw ConfigError("matrix must have one row per node");
    Matrix m(n, n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) throw ConfigError("matrix rows must have one entry per node");
        for (std::size_t c = 0; c < n; ++c) m(r, c) = rows[r][c].get<double>();
    }
    return m;
}

inline Model parse_model(const json& j, std::size_t agents) {
    if (!j.is_object()) throw ConfigError("model must be an object");
    const std::string family = j.value("family", "");
    if (family != "gaussian" && family != "categorical")
        throw ConfigError("model family must be gaussian or categorical");

    std::vector<std::string> labels;
    for (const auto& l : j.at("hypotheses")) labels.push_back(l.get<std::string>());
    const std::string truth = j.at("true_hypothesis").get<std::string>();
    std::size_t true_index = labels.size();
    for (std::size_t h = 0; h < labels.size(); ++h)
        if (labels[h] == truth) true_index = h;
    if (true_index == labels.size())
        throw ConfigError("true_hypothesis \"" + truth + "\" is not in the hypothesis list");

    try {
        HypothesisSpace hyp(labels, true_index);
        if (family == "gaussian") {
            reject_unknown_keys(j, {"family", "hypotheses", "true_hypothesis", "means"}, "model");
            std::vector<std::vector<double>> means;
            for (const auto& row : j.at("means")) means.push_back(row.get<std::vector<double>>());
            if (means.size() != agents)
                throw ConfigError("means must have one row per agent");
            return GaussianModel(std::move(hyp), std::move(means));
        }
        reject_unknown_keys(j, {"family", "hypotheses", "true_hypothesis", "probabilities"},
                            "model");
        std::vector<std::vector<std::vector<double>>> probs;
        for (const auto& agent_rows : j.at("probabilities")) {
            std::vector<std::vector<double>> rows;
            for (const auto& row : agent_rows) rows.push_back(row.get<std::vector<double>>());
            probs.push_back(std::move(rows));
        }
        if (probs.size() != agents)
            throw ConfigError("probabilities must have one block per agent");
        return CategoricalModel(std::move(hyp), std::move(probs));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("bad model: ") + ex.what());
    }
}

}  // namespace config_detail

// The benchmark experiment: 10-node ring-with-chords graph, lazy Metropolis
// weights, unit-variance Gaussian observations with shift vector
// (3,8,0,0,3,0,3,0,0,0), replacement dynamics over 2500 steps.
inline ExperimentConfig paper_10node_config() {
    const Graph graph = presets::ten_node_benchmark();
    const Vector nu = {3, 8, 0, 0, 3, 0, 3, 0, 0, 0};
    return ExperimentConfig{graph,
                            lazy_metropolis(graph),
                            GaussianModel::binary_shift(nu),
                            {0.0},
                            2500,
                            0,
                            1,
                            {},
                            false,
                            false,
                            ""};
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using config_detail::reject_unknown_keys;
    if (!j.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(j,
                        {"preset", "graph", "matrix", "model", "alpha", "horizon", "seed",
                         "replications", "prior", "record", "output_dir"},
                        "config");

    bool from_preset = false;
    ExperimentConfig cfg = [&] {
        if (j.contains("preset")) {
            const std::string name = j.at("preset").get<std::string>();
            if (name != "paper-10node") throw ConfigError("unknown preset \"" + name + "\"");
            from_preset = true;
            return paper_10node_config();
        }
        if (!j.contains("graph") || !j.contains("model"))
            throw ConfigError("config needs \"graph\" and \"model\" (or a \"preset\")");
        Graph graph = config_detail::parse_graph(j.at("graph"));
        CombinationMatrix matrix = config_detail::parse_matrix(
            j.contains("matrix") ? j.at("matrix") : nlohmann::json::object(), graph);
        Model model = config_detail::parse_model(j.at("model"), graph.node_count);
        return ExperimentConfig{std::move(graph), std::move(matrix), std::move(model),
                                {0.0},         2500,              0,
                                1,             {},                false,
                                false,         ""};
    }();

    if (from_preset) {
        if (j.contains("graph")) cfg.graph = config_detail::parse_graph(j.at("graph"));
        if (j.contains("matrix") || j.contains("graph"))
            cfg.matrix = config_detail::parse_matrix(
                j.contains("matrix") ? j.at("matrix") : nlohmann::json::object(), cfg.graph);
        if (j.contains("model"))
            cfg.model = config_detail::parse_model(j.at("model"), cfg.graph.node_count);
    }

    if (j.contains("alpha")) cfg.alphas = config_detail::parse_alpha(j.at("alpha"));
    if (cfg.alphas.size() != 1 && cfg.alphas.size() != cfg.agent_count())
        throw ConfigError("per-agent alpha needs one entry per agent");
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("replications")) {
        cfg.replications = j.at("replications").get<std::size_t>();
        if (cfg.replications == 0) throw ConfigError("replications must be at least 1");
    }
    if (j.contains("prior")) {
        cfg.prior = j.at("prior").get<Vector>();
        if (cfg.prior.size() != cfg.hypotheses().size())
            throw ConfigError("prior must have one entry per hypothesis");
        for (double p : cfg.prior)
            if (!(p > 0.0)) throw ConfigError("prior entries must be strictly positive");
    }
    if (j.contains("record")) {
        const auto& rec = j.at("record");
        reject_unknown_keys(rec, {"draws", "llrs"}, "record");
        cfg.record_draws = rec.value("draws", false);
        cfg.record_llrs = rec.value("llrs", false);
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

    const std::size_t agents =
        std::visit([](const auto& m) { return m.agent_count(); }, cfg.model);
    if (agents != cfg.agent_count())
        throw ConfigError("model must have one entry per graph node");
    return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    return parse_config(j);
}

}  // namespace slearn
