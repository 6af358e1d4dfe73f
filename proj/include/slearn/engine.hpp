#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "slearn/csv.hpp"
#include "slearn/matrix.hpp"
#include "slearn/models.hpp"
#include "slearn/network.hpp"
#include "slearn/rng.hpp"

namespace slearn {

// Per-agent log-beliefs over the hypothesis set. Everything stays in the log
// domain: the log-belief ratios grow linearly in time and would underflow any
// linear-domain representation long before the horizons of interest.
struct BeliefState {
    std::vector<Vector> log_belief;  // [agent][hypothesis], each row logsumexp = 0

    static BeliefState uniform(std::size_t agents, std::size_t hypotheses) {
        BeliefState b;
        b.log_belief.assign(agents, Vector(hypotheses, -std::log(static_cast<double>(hypotheses))));
        return b;
    }

    // Shared prior across agents; entries must be strictly positive.
    static BeliefState from_prior(std::size_t agents, const Vector& prior) {
        for (double p : prior)
            if (!(p > 0.0)) throw std::invalid_argument("prior beliefs must be strictly positive");
        Vector log_prior(prior.size());
        for (std::size_t h = 0; h < prior.size(); ++h) log_prior[h] = std::log(prior[h]);
        const double norm = log_sum_exp(log_prior);
        for (double& v : log_prior) v -= norm;
        BeliefState b;
        b.log_belief.assign(agents, log_prior);
        return b;
    }

    std::size_t agent_count() const { return log_belief.size(); }
    std::size_t hypothesis_count() const { return log_belief.empty() ? 0 : log_belief.front().size(); }

    double log_mu(std::size_t agent, std::size_t theta) const { return log_belief[agent][theta]; }
    double mu(std::size_t agent, std::size_t theta) const { return std::exp(log_belief[agent][theta]); }
};

// One chosen pull-source per agent; column k of the realization matrix A_i is
// the indicator of chosen[k].
struct NeighborDraw {
    std::vector<std::size_t> chosen;
};

struct SimConfig {
    Vector alphas{0.0};  // size 1 broadcasts to all agents
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    bool record_draws = false;
    bool record_llrs = false;
    Vector prior;  // per hypothesis; empty means uniform

    double alpha_for(std::size_t agent) const {
        return alphas.size() == 1 ? alphas[0] : alphas[agent];
    }

    void check(std::size_t agents) const {
        if (alphas.size() != 1 && alphas.size() != agents)
            throw std::invalid_argument("sim config: alpha vector must have one entry per agent");
        for (double a : alphas)
            if (!(a >= 0.0 && a < 1.0))
                throw std::invalid_argument("sim config: confidence weights must lie in [0,1)");
    }
};

// Time-indexed record of the run: log-belief ratios for every agent and every
// alternative hypothesis, plus optional draws and LLRs for cross-validation.
struct Trajectory {
    std::size_t agent_count = 0;
    std::size_t horizon = 0;
    std::vector<std::size_t> alt_thetas;  // hypothesis indices != true_index
    std::size_t true_theta = 0;
    Vector alphas;

    Vector lambda0;               // [agent][alt], from the prior
    Vector lambda;                // [step][agent][alt], steps 1..horizon
    Vector mu_true;               // [step][agent]
    std::vector<std::size_t> draws;  // [step][agent] when recorded
    Vector llrs;                  // [step][agent][alt] when recorded
    bool has_draws = false;
    bool has_llrs = false;

    std::size_t alt_count() const { return alt_thetas.size(); }

    double lambda_at(std::size_t step, std::size_t agent, std::size_t alt) const {
        if (step == 0) return lambda0[agent * alt_count() + alt];
        return lambda[((step - 1) * agent_count + agent) * alt_count() + alt];
    }
    double mu_true_at(std::size_t step, std::size_t agent) const {
        return mu_true[(step - 1) * agent_count + agent];
    }
    std::size_t draw_at(std::size_t step, std::size_t agent) const {
        return draws[(step - 1) * agent_count + agent];
    }
    double llr_at(std::size_t step, std::size_t agent, std::size_t alt) const {
        return llrs[((step - 1) * agent_count + agent) * alt_count() + alt];
    }
};

// Local Bayesian update (the adapt step): log psi_k = log L_k(xi_k|.) +
// log mu_k - logsumexp.
template <class Model>
BeliefState adapt(const BeliefState& beliefs,
                  const std::vector<typename Model::Observation>& observations,
                  const Model& model) {
    const std::size_t agents = beliefs.agent_count();
    const std::size_t hypotheses = beliefs.hypothesis_count();
    if (observations.size() != agents)
        throw std::invalid_argument("adapt: one observation per agent required");
    BeliefState out = beliefs;
    for (std::size_t k = 0; k < agents; ++k) {
        Vector& row = out.log_belief[k];
        for (std::size_t h = 0; h < hypotheses; ++h)
            row[h] += model.log_likelihood(k, observations[k], h);
        const double norm = log_sum_exp(row);
        if (!std::isfinite(norm))
            throw std::domain_error("adapt: observation has zero likelihood under every hypothesis");
        for (double& v : row) v -= norm;
    }
    return out;
}

inline std::size_t draw_from_column(const Matrix& a, std::size_t k, RandomStream& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t last_positive = a.rows();
    for (std::size_t l = 0; l < a.rows(); ++l) {
        const double w = a(l, k);
        if (w > 0.0) last_positive = l;
        cum += w;
        if (u < cum) return l;
    }
    if (last_positive == a.rows()) throw std::domain_error("draw: column has no positive entry");
    return last_positive;
}

// Each agent picks its pull source independently, column k of A being the
// source distribution of agent k.
inline NeighborDraw draw_neighbors(const CombinationMatrix& a, RandomStream& rng) {
    NeighborDraw d;
    d.chosen.resize(a.cols());
    for (std::size_t k = 0; k < a.cols(); ++k) d.chosen[k] = draw_from_column(a, k, rng);
    return d;
}

// Weighted geometric combination with the chosen neighbor's intermediate
// belief; alpha_k = 0 replaces the belief outright.
inline BeliefState combine(const BeliefState& intermediate, const NeighborDraw& draw,
                           const SimConfig& config) {
    const std::size_t agents = intermediate.agent_count();
    const std::size_t hypotheses = intermediate.hypothesis_count();
    BeliefState out = intermediate;
    for (std::size_t k = 0; k < agents; ++k) {
        const double alpha = config.alpha_for(k);
        const std::size_t l = draw.chosen[k];
        Vector& row = out.log_belief[k];
        for (std::size_t h = 0; h < hypotheses; ++h)
            row[h] = alpha * intermediate.log_belief[k][h] +
                     (1.0 - alpha) * intermediate.log_belief[l][h];
        const double norm = log_sum_exp(row);
        for (double& v : row) v -= norm;
    }
    return out;
}

inline BeliefState combine(const BeliefState& intermediate, const NeighborDraw& draw, double alpha) {
    SimConfig cfg;
    cfg.alphas = {alpha};
    return combine(intermediate, draw, cfg);
}

// Runs adapt -> draw -> combine for the configured horizon and records the
// log-belief ratio trajectory. Identical (config, seed) gives a bit-identical
// trajectory: one stream, fixed consumption order.
template <class Model>
Trajectory run(const Model& model, const CombinationMatrix& a, const SimConfig& config) {
    const std::size_t agents = model.agent_count();
    if (a.rows() != agents) throw std::invalid_argument("run: matrix size must match agent count");
    config.check(agents);
    const HypothesisSpace& hyp = model.hypotheses();
    if (!config.prior.empty() && config.prior.size() != hyp.size())
        throw std::invalid_argument("run: prior size must match hypothesis count");

    Trajectory traj;
    traj.agent_count = agents;
    traj.horizon = config.horizon;
    traj.alt_thetas = hyp.alternatives();
    traj.true_theta = hyp.true_index;
    traj.alphas.resize(agents);
    for (std::size_t k = 0; k < agents; ++k) traj.alphas[k] = config.alpha_for(k);
    traj.has_draws = config.record_draws;
    traj.has_llrs = config.record_llrs;

    const std::size_t alts = traj.alt_thetas.size();
    BeliefState beliefs = config.prior.empty() ? BeliefState::uniform(agents, hyp.size())
                                               : BeliefState::from_prior(agents, config.prior);

    traj.lambda0.resize(agents * alts);
    for (std::size_t k = 0; k < agents; ++k)
        for (std::size_t t = 0; t < alts; ++t)
            traj.lambda0[k * alts + t] =
                beliefs.log_mu(k, hyp.true_index) - beliefs.log_mu(k, traj.alt_thetas[t]);

    traj.lambda.reserve(config.horizon * agents * alts);
    traj.mu_true.reserve(config.horizon * agents);
    if (traj.has_draws) traj.draws.reserve(config.horizon * agents);
    if (traj.has_llrs) traj.llrs.reserve(config.horizon * agents * alts);

    RandomStream rng(config.seed);
    std::vector<typename Model::Observation> obs(agents);
    for (std::size_t step = 1; step <= config.horizon; ++step) {
        for (std::size_t k = 0; k < agents; ++k) obs[k] = model.sample(k, hyp.true_index, rng);
        if (traj.has_llrs)
            for (std::size_t k = 0; k < agents; ++k)
                for (std::size_t t = 0; t < alts; ++t)
                    traj.llrs.push_back(model.llr(k, obs[k], hyp.true_index, traj.alt_thetas[t]));

        const BeliefState intermediate = adapt(beliefs, obs, model);
        const NeighborDraw draw = draw_neighbors(a, rng);
        beliefs = combine(intermediate, draw, config);

        if (traj.has_draws)
            for (std::size_t k = 0; k < agents; ++k) traj.draws.push_back(draw.chosen[k]);
        for (std::size_t k = 0; k < agents; ++k) {
            for (std::size_t t = 0; t < alts; ++t) {
                const double lam = beliefs.log_mu(k, hyp.true_index) -
                                   beliefs.log_mu(k, traj.alt_thetas[t]);
                if (!std::isfinite(lam))
                    throw std::domain_error(
                        "run: log-belief ratio diverged, the model violates absolute continuity");
                traj.lambda.push_back(lam);
            }
            traj.mu_true.push_back(beliefs.mu(k, hyp.true_index));
        }
    }
    return traj;
}

struct RecursionCheck {
    bool ok = true;
    std::size_t step = 0;   // first failing step (1-based) when !ok
    std::size_t agent = 0;
    std::size_t alt = 0;
    double max_abs_diff = 0.0;
};

// Verifies the log-belief-ratio recursion
//   lambda_{k,i} = alpha_k (x_{k,i} + lambda_{k,i-1}) + (1-alpha_k)(x_{l,i} + lambda_{l,i-1})
// at every recorded step against the belief-domain values.
inline RecursionCheck lambda_recursion_check(const Trajectory& traj, double tol = 1e-9) {
    if (!traj.has_draws || !traj.has_llrs)
        throw std::invalid_argument("recursion check requires recorded draws and LLRs");
    RecursionCheck result;
    for (std::size_t step = 1; step <= traj.horizon; ++step) {
        for (std::size_t k = 0; k < traj.agent_count; ++k) {
            const double alpha = traj.alphas[k];
            const std::size_t l = traj.draw_at(step, k);
            for (std::size_t t = 0; t < traj.alt_count(); ++t) {
                const double expected =
                    alpha * (traj.llr_at(step, k, t) + traj.lambda_at(step - 1, k, t)) +
                    (1.0 - alpha) * (traj.llr_at(step, l, t) + traj.lambda_at(step - 1, l, t));
                const double diff = std::fabs(expected - traj.lambda_at(step, k, t));
                if (diff > result.max_abs_diff) result.max_abs_diff = diff;
                if (diff > tol && result.ok) {
                    result.ok = false;
                    result.step = step;
                    result.agent = k;
                    result.alt = t;
                }
            }
        }
    }
    return result;
}

// Running average (1/i) sum w_n of the weight recursion
// w_n = (J + A_n (I - J)) w_{n-1}, w_0 = e_1, which converges to the Perron
// vector of the expected matrix.
inline Vector weight_average_diagnostic(const CombinationMatrix& a, double alpha,
                                        std::size_t horizon, RandomStream& rng) {
    const std::size_t n = a.rows();
    Vector w(n, 0.0);
    w[0] = 1.0;
    Vector sum(n, 0.0), next(n, 0.0);
    for (std::size_t step = 0; step < horizon; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t l = draw_from_column(a, k, rng);
            next[k] += alpha * w[k];
            next[l] += (1.0 - alpha) * w[k];
        }
        w = next;
        for (std::size_t k = 0; k < n; ++k) sum[k] += w[k];
    }
    for (double& v : sum) v /= static_cast<double>(horizon);
    return sum;
}

inline Vector weight_average_diagnostic(const CombinationMatrix& a, double alpha,
                                        std::size_t horizon, std::uint64_t seed) {
    RandomStream rng(seed);
    return weight_average_diagnostic(a, alpha, horizon, rng);
}

// CSV schema: step,agent,theta_index,lambda,mu_true. Agents are 1-based,
// theta_index is the 0-based index in the hypothesis ordering.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "step,agent,theta_index,lambda,mu_true\n";
    for (std::size_t step = 1; step <= traj.horizon; ++step)
        for (std::size_t k = 0; k < traj.agent_count; ++k)
            for (std::size_t t = 0; t < traj.alt_count(); ++t)
                out << step << ',' << (k + 1) << ',' << traj.alt_thetas[t] << ','
                    << csv::format_double(traj.lambda_at(step, k, t)) << ','
                    << csv::format_double(traj.mu_true_at(step, k)) << '\n';
}

// CSV schema: step,agent,chosen_neighbor (both ids 1-based).
inline void write_draws_csv(const Trajectory& traj, std::ostream& out) {
    out << "step,agent,chosen_neighbor\n";
    if (!traj.has_draws) return;
    for (std::size_t step = 1; step <= traj.horizon; ++step)
        for (std::size_t k = 0; k < traj.agent_count; ++k)
            out << step << ',' << (k + 1) << ',' << (traj.draw_at(step, k) + 1) << '\n';
}

}  // namespace slearn
