#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slearn/analysis.hpp"
#include "slearn/csv.hpp"
#include "slearn/engine.hpp"
#include "slearn/matrix.hpp"
#include "slearn/models.hpp"
#include "slearn/rng.hpp"

namespace slearn {

enum class Direction { Below, Above };

inline std::string to_string(Direction d) { return d == Direction::Below ? "below" : "above"; }

struct SaturationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WeightOverflowError : std::runtime_error {
    double log_weight;
    explicit WeightOverflowError(double lw)
        : std::runtime_error("importance weight overflow, log-weight = " + std::to_string(lw) +
                             "; reduce |t| or the horizon"),
          log_weight(lw) {}
};

// t*(s) = argmax_t { s t - log Lambda(t) }; negative below the mean, positive
// above it.
inline double solve_tilt(const RateFunction& rate, double s) {
    const RatePoint p = rate.at(s);
    if (p.saturated)
        throw SaturationError("solve_tilt: slope " + std::to_string(s) +
                              " is not attainable inside the tilt window");
    return p.t_star;
}

// Exponentially tilted replacement chain. The kernel
//   Q_t(m -> l) = a(l,m) M_l(t) u_l(t) / S_m,   S_m = sum_l a(l,m) M_l(t) u_l(t),
// is row-stochastic by construction, and the eigen equation makes
// S_m = Lambda(t) u_m(t). Observations are drawn from the per-state tilted
// laws; the per-step change-of-measure factor for a transition m -> l
// carrying LLR x is S_m / u_l * exp(-t x), whose product over a path
// telescopes to Lambda^i (u_{m_0}/u_{m_i}) exp(-t lambda_i).
template <class Model>
struct TiltedProcess {
    Model model;
    std::size_t theta0 = 0;
    std::size_t theta = 1;
    double t = 0.0;
    double log_lambda = 0.0;
    Vector u;                // max-normalized positive eigenvector
    Vector log_u;
    Vector log_row_factor;   // log S_m
    Matrix kernel;           // kernel(m, l) = Q_t(m -> l)

    std::size_t state_count() const { return kernel.rows(); }
};

template <class Model>
TiltedProcess<Model> build_tilted(const CombinationMatrix& a, const Model& model,
                                  std::size_t theta0, std::size_t theta, double t,
                                  double consistency_tol = 1e-9) {
    const TiltedMatrix tm = tilted_matrix(a, model, theta0, theta, t);
    const EigenData ed = log_perron(tm);
    const std::size_t n = a.rows();

    TiltedProcess<Model> proc{model, theta0, theta, t, ed.log_lambda, ed.u, Vector(n), Vector(n),
                              Matrix(n, n, 0.0)};
    for (std::size_t k = 0; k < n; ++k) proc.log_u[k] = std::log(ed.u[k]);

    const double log_lambda_scaled = ed.log_lambda - tm.log_scale;
    for (std::size_t m = 0; m < n; ++m) {
        double s_scaled = 0.0;
        for (std::size_t l = 0; l < n; ++l) s_scaled += tm.scaled(l, m) * ed.u[l];
        // eigen equation: S_m must equal Lambda u_m up to the solver residual
        const double rel = std::fabs(s_scaled / (std::exp(log_lambda_scaled) * ed.u[m]) - 1.0);
        if (rel > consistency_tol)
            throw std::runtime_error("build_tilted: tilted kernel row " + std::to_string(m + 1) +
                                     " deviates from stochasticity by " + std::to_string(rel));
        proc.log_row_factor[m] = std::log(s_scaled) + tm.log_scale;
        for (std::size_t l = 0; l < n; ++l) proc.kernel(m, l) = tm.scaled(l, m) * ed.u[l] / s_scaled;
    }
    return proc;
}

template <class Model>
struct TiltedPath {
    std::vector<std::size_t> states;  // m_0 .. m_i
    double lambda = 0.0;              // sum of LLRs collected along the path
    double log_weight = 0.0;          // sum of per-step log change-of-measure factors
};

template <class Model>
TiltedPath<Model> simulate_tilted_path(const TiltedProcess<Model>& proc, std::size_t start,
                                       std::size_t horizon, RandomStream& rng) {
    TiltedPath<Model> path;
    path.states.reserve(horizon + 1);
    path.states.push_back(start);
    std::size_t m = start;
    for (std::size_t step = 0; step < horizon; ++step) {
        const std::size_t l = rng.categorical(proc.kernel.row(m), proc.state_count());
        const auto obs = proc.model.sample_tilted(l, proc.t, proc.theta0, proc.theta, rng);
        const double x = proc.model.llr(l, obs, proc.theta0, proc.theta);
        path.log_weight += proc.log_row_factor[m] - proc.log_u[l] - proc.t * x;
        path.lambda += x;
        path.states.push_back(l);
        m = l;
    }
    return path;
}

struct DeviationEstimate {
    std::size_t agent = 0;  // start state, 0-based
    std::size_t horizon = 0;
    double s = 0.0;
    Direction direction = Direction::Below;
    double p_hat = 0.0;
    double log_p_hat = -std::numeric_limits<double>::infinity();
    double std_error = 0.0;
    std::size_t replications = 0;
    std::string method;

    double minus_log_p_over_i() const {
        return -log_p_hat / static_cast<double>(horizon);
    }
};

namespace detail {

// Mean and standard error of w_n * ind_n from the hit log-weights, computed
// against the largest exponent so that astronomically small weights survive.
inline void aggregate_log_weights(const Vector& hit_log_weights, std::size_t n_total,
                                  DeviationEstimate& est) {
    est.replications = n_total;
    if (hit_log_weights.empty()) {
        est.p_hat = 0.0;
        est.log_p_hat = -std::numeric_limits<double>::infinity();
        est.std_error = 0.0;
        return;
    }
    double c = hit_log_weights[0];
    for (double lw : hit_log_weights) c = std::max(c, lw);
    if (c > 700.0) throw WeightOverflowError(c);
    double sum1 = 0.0, sum2 = 0.0;
    for (double lw : hit_log_weights) {
        sum1 += std::exp(lw - c);
        sum2 += std::exp(2.0 * (lw - c));
    }
    const double n = static_cast<double>(n_total);
    est.log_p_hat = c + std::log(sum1) - std::log(n);
    est.p_hat = std::exp(est.log_p_hat);
    if (n_total > 1) {
        const double m1 = sum1 / n;                    // scaled by e^{-c}
        const double m2 = sum2 / n;                    // scaled by e^{-2c}
        const double var = std::max(0.0, m2 - m1 * m1) * n / (n - 1.0);
        est.std_error = std::exp(c) * std::sqrt(var / n);
    }
}

}  // namespace detail

// Importance-sampling estimate of the deviation probability
// P((1/i) lambda_{k,i} < s) (or > s) in the replacement regime, simulated
// under the tilted chain and reweighted by the telescoping path weight.
template <class Model>
DeviationEstimate importance_estimate(const TiltedProcess<Model>& proc, std::size_t start,
                                      std::size_t horizon, double s, Direction direction,
                                      std::size_t replications, std::uint64_t seed) {
    if (replications == 0) throw std::invalid_argument("importance_estimate: need N >= 1");
    if (start >= proc.state_count()) throw std::invalid_argument("importance_estimate: bad start agent");
    DeviationEstimate est;
    est.agent = start;
    est.horizon = horizon;
    est.s = s;
    est.direction = direction;
    est.method = "importance";

    const double threshold = s * static_cast<double>(horizon);
    Vector hit_log_weights;
    for (std::size_t n = 0; n < replications; ++n) {
        RandomStream rng(derive_seed(seed, n));
        const auto path = simulate_tilted_path(proc, start, horizon, rng);
        const bool hit = (direction == Direction::Below) ? (path.lambda < threshold)
                                                         : (path.lambda > threshold);
        if (hit) hit_log_weights.push_back(path.log_weight);
    }
    detail::aggregate_log_weights(hit_log_weights, replications, est);
    return est;
}

// Plain Monte Carlo baseline: fraction of full engine runs (alpha = 0) whose
// final average log-belief ratio lands beyond s. Goes through the
// belief-domain simulator, so the two estimators share no code path.
template <class Model>
DeviationEstimate plain_estimate(const Model& model, const CombinationMatrix& a, std::size_t agent,
                                 std::size_t horizon, double s, Direction direction,
                                 std::size_t replications, std::uint64_t seed,
                                 std::size_t theta_alt = static_cast<std::size_t>(-1)) {
    if (replications == 0) throw std::invalid_argument("plain_estimate: need N >= 1");
    const auto alts = model.hypotheses().alternatives();
    std::size_t alt_pos = 0;
    if (theta_alt != static_cast<std::size_t>(-1)) {
        alt_pos = alts.size();
        for (std::size_t i = 0; i < alts.size(); ++i)
            if (alts[i] == theta_alt) alt_pos = i;
        if (alt_pos == alts.size())
            throw std::invalid_argument("plain_estimate: theta is not an alternative hypothesis");
    }

    DeviationEstimate est;
    est.agent = agent;
    est.horizon = horizon;
    est.s = s;
    est.direction = direction;
    est.method = "plain";
    est.replications = replications;

    const double threshold = s * static_cast<double>(horizon);
    std::size_t hits = 0;
    SimConfig cfg;
    cfg.alphas = {0.0};
    cfg.horizon = horizon;
    for (std::size_t n = 0; n < replications; ++n) {
        cfg.seed = derive_seed(seed, n);
        const Trajectory traj = run(model, a, cfg);
        const double lam = traj.lambda_at(horizon, agent, alt_pos);
        const bool hit = (direction == Direction::Below) ? (lam < threshold) : (lam > threshold);
        if (hit) ++hits;
    }
    const double n = static_cast<double>(replications);
    est.p_hat = static_cast<double>(hits) / n;
    est.log_p_hat = hits > 0 ? std::log(est.p_hat) : -std::numeric_limits<double>::infinity();
    est.std_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / n);
    return est;
}

// CSV schema: s,i,k,method,p_hat,stderr,N,minus_log_p_over_i (k is 1-based).
inline void write_deviation_csv_header(std::ostream& out) {
    out << "s,i,k,method,p_hat,stderr,N,minus_log_p_over_i\n";
}

inline void write_deviation_csv_row(const DeviationEstimate& est, std::ostream& out) {
    out << csv::format_double(est.s) << ',' << est.horizon << ',' << (est.agent + 1) << ','
        << est.method << ',' << csv::format_double(est.p_hat) << ','
        << csv::format_double(est.std_error) << ',' << est.replications << ','
        << csv::format_double(est.minus_log_p_over_i()) << '\n';
}

}  // namespace slearn
