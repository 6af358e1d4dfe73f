#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "slearn/analysis.hpp"
#include "slearn/config.hpp"
#include "slearn/csv.hpp"
#include "slearn/engine.hpp"
#include "slearn/models.hpp"
#include "slearn/montecarlo.hpp"
#include "slearn/network.hpp"

namespace slearn::cli {

// Exit codes, also documented in the README: 1 is left to the argument
// parser for usage errors.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

namespace detail {

inline std::string resolve_output_path(const std::string& explicit_path,
                                       const ExperimentConfig& cfg, const char* filename) {
    if (!explicit_path.empty()) return explicit_path;
    std::string dir = cfg.output_dir;
    if (dir.empty())
        if (const char* env = std::getenv("SLEARN_OUT_DIR")) dir = env;
    if (dir.empty()) dir = ".";
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / filename).string();
}

inline std::string with_replication_suffix(const std::string& path, std::size_t index) {
    const std::filesystem::path p(path);
    std::filesystem::path named = p.parent_path() / p.stem();
    named += "_r" + std::to_string(index);
    named += p.extension();
    return named.string();
}

inline std::size_t default_alternative(const HypothesisSpace& hyp, const std::string& label,
                                       std::ostream& err, bool& ok) {
    ok = true;
    if (label.empty()) return hyp.alternatives().front();
    for (std::size_t h = 0; h < hyp.size(); ++h) {
        if (hyp.labels[h] == label) {
            if (h == hyp.true_index) {
                err << "error: theta must differ from the true hypothesis\n";
                ok = false;
                return 0;
            }
            return h;
        }
    }
    err << "error: unknown hypothesis label \"" << label << "\"\n";
    ok = false;
    return 0;
}

}  // namespace detail

// Loads the config, validates the combination matrix, reports identifiability
// and the divergence data, and prints the asymptotic learning rate.
inline int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err,
                        const std::string& export_matrix_path = "") {
    std::optional<ExperimentConfig> loaded;
    try {
        loaded = load_config(config_path);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }
    ExperimentConfig& cfg = *loaded;

    out << "agents: " << cfg.agent_count() << ", edges: " << cfg.graph.edges.size() << "\n";
    const ValidationReport report = validate(cfg.matrix);
    if (!report.ok) {
        for (const auto& v : report.violations) err << "validation: " << v << "\n";
        return kExitValidation;
    }
    out << "combination matrix: valid (left-stochastic, strongly connected)\n";

    if (!export_matrix_path.empty()) {
        std::ofstream m(export_matrix_path);
        if (!m) {
            err << "cannot write " << export_matrix_path << "\n";
            return kExitRuntime;
        }
        for (std::size_t r = 0; r < cfg.matrix.rows(); ++r) {
            for (std::size_t c = 0; c < cfg.matrix.cols(); ++c)
                m << (c ? "," : "") << csv::format_double(cfg.matrix(r, c));
            m << "\n";
        }
        out << "matrix written to " << export_matrix_path << "\n";
    }

    const PerronVector pi = perron_vector(cfg.matrix);
    out << "perron vector:";
    for (double v : pi) out << ' ' << csv::format_double(v);
    out << "\n";

    std::visit(
        [&](const auto& model) {
            const auto& hyp = model.hypotheses();
            out << "true hypothesis: " << hyp.labels[hyp.true_index] << "\n";
            for (std::size_t theta : hyp.alternatives()) {
                const auto d = divergence_vector(model, hyp.true_index, theta);
                out << "divergences vs " << hyp.labels[theta] << ":";
                bool finite = true;
                for (double v : d) {
                    out << ' ' << csv::format_double(v);
                    finite = finite && std::isfinite(v);
                }
                out << "\n";
                if (finite)
                    out << "asymptotic rate vs " << hyp.labels[theta] << ": "
                        << csv::format_double(asymptotic_rate(pi, d)) << "\n";
                else
                    out << "warning: infinite divergence, the convergence-rate results need "
                           "finite divergences\n";
            }
            out << "identifiable: " << (is_identifiable(model) ? "yes" : "no") << "\n";
        },
        cfg.model);
    return kExitOk;
}

struct SimulateOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<double> alpha;
};

// Runs one trajectory and writes the per-step log-belief-ratio CSV.
inline int cmd_simulate(const std::string& config_path, const SimulateOverrides& overrides,
                        const std::string& out_path, const std::string& draws_path,
                        std::ostream& out, std::ostream& err) {
    std::optional<ExperimentConfig> loaded;
    try {
        loaded = load_config(config_path);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }
    ExperimentConfig& cfg = *loaded;
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.steps) cfg.horizon = *overrides.steps;
    if (overrides.alpha) {
        if (!(*overrides.alpha >= 0.0 && *overrides.alpha < 1.0)) {
            err << "config error: alpha must lie in [0,1)\n";
            return kExitConfig;
        }
        cfg.alphas = {*overrides.alpha};
    }
    const ValidationReport report = validate(cfg.matrix);
    if (!report.ok) {
        for (const auto& v : report.violations) err << "validation: " << v << "\n";
        return kExitValidation;
    }
    if (!draws_path.empty()) cfg.record_draws = true;

    try {
        const std::string base = detail::resolve_output_path(out_path, cfg, "trajectory.csv");
        for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
            SimConfig sim = cfg.sim_config();
            std::string path = base, dpath = draws_path;
            if (cfg.replications > 1) {
                sim.seed = derive_seed(cfg.seed, rep);
                path = detail::with_replication_suffix(base, rep + 1);
                if (!dpath.empty()) dpath = detail::with_replication_suffix(draws_path, rep + 1);
            }
            const Trajectory traj = std::visit(
                [&](const auto& model) { return run(model, cfg.matrix, sim); }, cfg.model);
            std::ofstream file(path);
            if (!file) {
                err << "cannot write " << path << "\n";
                return kExitRuntime;
            }
            write_trajectory_csv(traj, file);
            out << "trajectory written to " << path << " (" << traj.horizon << " steps, "
                << traj.agent_count << " agents)\n";
            if (!dpath.empty()) {
                std::ofstream draws(dpath);
                if (!draws) {
                    err << "cannot write " << dpath << "\n";
                    return kExitRuntime;
                }
                write_draws_csv(traj, draws);
                out << "draws written to " << dpath << "\n";
            }
        }
    } catch (const std::exception& ex) {
        err << "runtime error: " << ex.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

struct RateOptions {
    double s_lo = 0.0;
    double s_hi = 10.0;
    double s_step = 0.1;
    std::string theta_label;  // empty = first alternative
};

// Tabulates the large-deviations rate function I(s) on a grid.
inline int cmd_rate(const std::string& config_path, const RateOptions& options,
                    const std::string& out_path, std::ostream& out, std::ostream& err) {
    std::optional<ExperimentConfig> loaded;
    try {
        loaded = load_config(config_path);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }
    ExperimentConfig& cfg = *loaded;
    if (options.s_step <= 0.0 || options.s_hi < options.s_lo) {
        err << "error: empty s-grid\n";
        return kExitConfig;
    }
    if (!cfg.replacement_case())
        err << "warning: the large-deviations analysis applies to the replacement case "
               "(alpha = 0); this config has alpha != 0\n";

    bool theta_ok = true;
    const std::size_t theta =
        detail::default_alternative(cfg.hypotheses(), options.theta_label, err, theta_ok);
    if (!theta_ok) return kExitConfig;

    try {
        return std::visit(
            [&](const auto& model) {
                const RateFunction rate = rate_function(cfg.matrix, model, model.hypotheses().true_index, theta);
                std::vector<RatePoint> points;
                double best_s = options.s_lo, best_v = std::numeric_limits<double>::infinity();
                const std::size_t grid_count = static_cast<std::size_t>(
                    (options.s_hi - options.s_lo) / options.s_step + 1e-9);
                for (std::size_t g = 0; g <= grid_count; ++g) {
                    const double s = options.s_lo + options.s_step * static_cast<double>(g);
                    points.push_back(rate.at(s));
                    if (points.back().value < best_v) {
                        best_v = points.back().value;
                        best_s = s;
                    }
                }
                const std::string path = detail::resolve_output_path(out_path, cfg, "rate.csv");
                std::ofstream file(path);
                if (!file) {
                    err << "cannot write " << path << "\n";
                    return kExitRuntime;
                }
                write_rate_csv(points, file);
                const auto pi = perron_vector(cfg.matrix);
                const auto d = divergence_vector(model, model.hypotheses().true_index, theta);
                out << "rate table written to " << path << " (" << points.size() << " rows)\n";
                out << "asymptotic rate <pi,d> = " << csv::format_double(asymptotic_rate(pi, d))
                    << "\n";
                out << "grid minimum I(" << csv::format_double(best_s) << ") = "
                    << csv::format_double(best_v) << "\n";
                return kExitOk;
            },
            cfg.model);
    } catch (const std::exception& ex) {
        err << "runtime error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}

struct DeviationOptions {
    double s = 0.0;
    std::optional<std::size_t> horizon;  // defaults to the config horizon
    std::size_t agent = 1;               // 1-based
    std::size_t replications = 60;
    std::string method = "importance";   // importance | plain
    std::string theta_label;
};

// Estimates the deviation probability p_{k,i}(s) and appends one CSV row.
inline int cmd_deviation(const std::string& config_path, const DeviationOptions& options,
                         const std::string& out_path, std::ostream& out, std::ostream& err) {
    std::optional<ExperimentConfig> loaded;
    try {
        loaded = load_config(config_path);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }
    ExperimentConfig& cfg = *loaded;
    if (!cfg.replacement_case()) {
        err << "error: deviation estimates are defined for the replacement case (alpha = 0)\n";
        return kExitValidation;
    }
    if (options.agent < 1 || options.agent > cfg.agent_count()) {
        err << "error: agent must lie in 1.." << cfg.agent_count() << "\n";
        return kExitConfig;
    }
    if (options.method != "importance" && options.method != "plain") {
        err << "error: method must be importance or plain\n";
        return kExitConfig;
    }
    if (options.replications == 0) {
        err << "error: need at least one replication\n";
        return kExitConfig;
    }
    bool theta_ok = true;
    const std::size_t theta =
        detail::default_alternative(cfg.hypotheses(), options.theta_label, err, theta_ok);
    if (!theta_ok) return kExitConfig;

    const std::size_t horizon = options.horizon.value_or(cfg.horizon);
    try {
        return std::visit(
            [&](const auto& model) {
                const std::size_t t0 = model.hypotheses().true_index;
                const auto pi = perron_vector(cfg.matrix);
                const auto d = divergence_vector(model, t0, theta);
                const double mean = asymptotic_rate(pi, d);
                const Direction dir = options.s < mean ? Direction::Below : Direction::Above;

                DeviationEstimate est;
                if (options.method == "plain") {
                    est = plain_estimate(model, cfg.matrix, options.agent - 1, horizon, options.s,
                                         dir, options.replications, cfg.seed, theta);
                } else {
                    const RateFunction rate = rate_function(cfg.matrix, model, t0, theta);
                    const double tilt = solve_tilt(rate, options.s);
                    const auto proc = build_tilted(cfg.matrix, model, t0, theta, tilt);
                    est = importance_estimate(proc, options.agent - 1, horizon, options.s, dir,
                                              options.replications, cfg.seed);
                }

                const std::string path = detail::resolve_output_path(out_path, cfg, "deviation.csv");
                const bool fresh = !std::filesystem::exists(path);
                std::ofstream file(path, std::ios::app);
                if (!file) {
                    err << "cannot write " << path << "\n";
                    return kExitRuntime;
                }
                if (fresh) write_deviation_csv_header(file);
                write_deviation_csv_row(est, file);
                out << "method=" << est.method << " k=" << options.agent << " i=" << horizon
                    << " s=" << csv::format_double(options.s)
                    << " direction=" << to_string(est.direction)
                    << " p_hat=" << csv::format_double(est.p_hat)
                    << " stderr=" << csv::format_double(est.std_error)
                    << " -log(p)/i=" << csv::format_double(est.minus_log_p_over_i()) << "\n";
                out << "row appended to " << path << "\n";
                return kExitOk;
            },
            cfg.model);
    } catch (const SaturationError& ex) {
        err << "runtime error: " << ex.what() << "\n";
        return kExitRuntime;
    } catch (const WeightOverflowError& ex) {
        err << "runtime error: " << ex.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& ex) {
        err << "runtime error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace slearn::cli
