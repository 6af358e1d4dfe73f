#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "slearn/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "slearn: social learning over randomized gossip -- simulation, learning-rate analysis, "
        "and rare-event deviation estimates"};
    app.require_subcommand(1);

    int rc = slearn::cli::kExitOk;

    // validate
    std::string v_config, v_export;
    auto* v = app.add_subcommand("validate",
                                 "Check a config: combination matrix, identifiability, rate");
    v->add_option("config", v_config, "experiment config (JSON)")->required();
    v->add_option("--export-matrix", v_export, "write the combination matrix as CSV");
    v->callback([&] { rc = slearn::cli::cmd_validate(v_config, std::cout, std::cerr, v_export); });

    // simulate
    std::string s_config, s_out, s_draws;
    slearn::cli::SimulateOverrides s_over;
    std::uint64_t s_seed = 0;
    std::size_t s_steps = 0;
    double s_alpha = 0.0;
    auto* s = app.add_subcommand("simulate", "Run the learning recursion and write trajectories");
    s->add_option("config", s_config, "experiment config (JSON)")->required();
    auto* seed_opt = s->add_option("--seed", s_seed, "override the seed");
    auto* steps_opt = s->add_option("--steps", s_steps, "override the horizon");
    auto* alpha_opt = s->add_option("--alpha", s_alpha, "override the confidence weight");
    s->add_option("--out", s_out, "trajectory CSV path");
    s->add_option("--draws-out", s_draws, "also write the neighbor draws CSV");
    s->callback([&] {
        if (*seed_opt) s_over.seed = s_seed;
        if (*steps_opt) s_over.steps = s_steps;
        if (*alpha_opt) s_over.alpha = s_alpha;
        rc = slearn::cli::cmd_simulate(s_config, s_over, s_out, s_draws, std::cout, std::cerr);
    });

    // rate
    std::string r_config, r_grid, r_out;
    slearn::cli::RateOptions r_opts;
    auto* r = app.add_subcommand("rate", "Tabulate the large-deviations rate function I(s)");
    r->add_option("config", r_config, "experiment config (JSON)")->required();
    r->add_option("--s-grid", r_grid, "grid as lo:hi:step (default 0:10:0.1)");
    r->add_option("--theta", r_opts.theta_label, "alternative hypothesis label");
    r->add_option("--out", r_out, "rate table CSV path");
    r->callback([&] {
        if (!r_grid.empty()) {
            const auto c1 = r_grid.find(':'), c2 = r_grid.rfind(':');
            if (c1 == std::string::npos || c2 == c1) {
                std::cerr << "error: --s-grid must be lo:hi:step\n";
                rc = slearn::cli::kExitConfig;
                return;
            }
            try {
                r_opts.s_lo = std::stod(r_grid.substr(0, c1));
                r_opts.s_hi = std::stod(r_grid.substr(c1 + 1, c2 - c1 - 1));
                r_opts.s_step = std::stod(r_grid.substr(c2 + 1));
            } catch (const std::exception&) {
                std::cerr << "error: --s-grid must be lo:hi:step\n";
                rc = slearn::cli::kExitConfig;
                return;
            }
        }
        rc = slearn::cli::cmd_rate(r_config, r_opts, r_out, std::cout, std::cerr);
    });

    // deviation
    std::string d_config, d_out;
    slearn::cli::DeviationOptions d_opts;
    std::size_t d_horizon = 0;
    auto* d = app.add_subcommand("deviation", "Estimate a deviation probability p_{k,i}(s)");
    d->add_option("config", d_config, "experiment config (JSON)")->required();
    d->add_option("--s", d_opts.s, "deviation threshold")->required();
    auto* hor_opt = d->add_option("--i", d_horizon, "horizon (default: config horizon)");
    d->add_option("--k", d_opts.agent, "agent, 1-based (default 1)");
    d->add_option("--N", d_opts.replications, "replications (default 60)");
    d->add_option("--method", d_opts.method, "importance | plain (default importance)");
    d->add_option("--theta", d_opts.theta_label, "alternative hypothesis label");
    d->add_option("--out", d_out, "deviation CSV path (appended)");
    d->callback([&] {
        if (*hor_opt) d_opts.horizon = d_horizon;
        rc = slearn::cli::cmd_deviation(d_config, d_opts, d_out, std::cout, std::cerr);
    });

    CLI11_PARSE(app, argc, argv);
    return rc;
}
