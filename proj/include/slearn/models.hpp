#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "slearn/matrix.hpp"
#include "slearn/rng.hpp"

namespace slearn {

struct HypothesisSpace {
    std::vector<std::string> labels;
    std::size_t true_index = 0;

    HypothesisSpace() = default;
    HypothesisSpace(std::vector<std::string> names, std::size_t truth)
        : labels(std::move(names)), true_index(truth) {
        if (labels.size() < 2) throw std::invalid_argument("hypothesis space needs at least 2 entries");
        if (true_index >= labels.size())
            throw std::invalid_argument("true hypothesis outside the hypothesis set");
    }

    std::size_t size() const { return labels.size(); }

    std::vector<std::size_t> alternatives() const {
        std::vector<std::size_t> alt;
        for (std::size_t h = 0; h < labels.size(); ++h)
            if (h != true_index) alt.push_back(h);
        return alt;
    }
};

// Per-agent unit-variance Gaussian likelihoods, one mean per (agent,
// hypothesis). LLR, KL divergence, and the LLR moment generating function all
// have closed forms.
class GaussianModel {
public:
    using Observation = double;

    GaussianModel(HypothesisSpace hypotheses, std::vector<std::vector<double>> means)
        : hypotheses_(std::move(hypotheses)), means_(std::move(means)) {
        if (means_.empty()) throw std::invalid_argument("gaussian model: no agents");
        for (const auto& row : means_) {
            if (row.size() != hypotheses_.size())
                throw std::invalid_argument("gaussian model: one mean per hypothesis required");
            for (double m : row)
                if (!std::isfinite(m)) throw std::invalid_argument("gaussian model: non-finite mean");
        }
    }

    // Binary testing setup: mean 0 under the true hypothesis, nu_k under the
    // alternative.
    static GaussianModel binary_shift(const Vector& nu,
                                      std::vector<std::string> labels = {"theta0", "theta1"}) {
        std::vector<std::vector<double>> means;
        means.reserve(nu.size());
        for (double v : nu) means.push_back({0.0, v});
        return GaussianModel(HypothesisSpace(std::move(labels), 0), std::move(means));
    }

    std::size_t agent_count() const { return means_.size(); }
    const HypothesisSpace& hypotheses() const { return hypotheses_; }
    double mean(std::size_t agent, std::size_t theta) const { return means_[agent][theta]; }

    Observation sample(std::size_t agent, std::size_t theta, RandomStream& rng) const {
        return rng.normal(means_[agent][theta], 1.0);
    }

    double log_likelihood(std::size_t agent, Observation x, std::size_t theta) const {
        const double d = x - means_[agent][theta];
        return -0.5 * d * d - 0.5 * std::log(2.0 * M_PI);
    }

    double llr(std::size_t agent, Observation x, std::size_t theta0, std::size_t theta) const {
        const double m0 = means_[agent][theta0], m1 = means_[agent][theta];
        return (m0 - m1) * x + 0.5 * (m1 * m1 - m0 * m0);
    }

    double divergence(std::size_t agent, std::size_t theta0, std::size_t theta) const {
        const double delta = means_[agent][theta0] - means_[agent][theta];
        return 0.5 * delta * delta;
    }

    // log E[exp(t x_k)] under theta0 = (t + t^2) * delta^2 / 2
    double log_mgf(std::size_t agent, double t, std::size_t theta0, std::size_t theta) const {
        const double delta = means_[agent][theta0] - means_[agent][theta];
        return (t + t * t) * 0.5 * delta * delta;
    }

    // Exponential tilt of the observation law: shifts the mean, variance stays 1.
    Observation sample_tilted(std::size_t agent, double t, std::size_t theta0, std::size_t theta,
                              RandomStream& rng) const {
        const double delta = means_[agent][theta0] - means_[agent][theta];
        return rng.normal(means_[agent][theta0] + t * delta, 1.0);
    }

private:
    HypothesisSpace hypotheses_;
    std::vector<std::vector<double>> means_;  // [agent][hypothesis]
};

// Finite-alphabet likelihoods, one probability vector per (agent,
// hypothesis). Exact finite sums make this family the brute-force oracle of
// choice in tests.
class CategoricalModel {
public:
    using Observation = std::size_t;

    CategoricalModel(HypothesisSpace hypotheses,
                     std::vector<std::vector<std::vector<double>>> probabilities)
        : hypotheses_(std::move(hypotheses)), probs_(std::move(probabilities)) {
        if (probs_.empty()) throw std::invalid_argument("categorical model: no agents");
        for (const auto& agent_rows : probs_) {
            if (agent_rows.size() != hypotheses_.size())
                throw std::invalid_argument("categorical model: one row per hypothesis required");
            const std::size_t alphabet = agent_rows.front().size();
            if (alphabet == 0) throw std::invalid_argument("categorical model: empty alphabet");
            for (const auto& row : agent_rows) {
                if (row.size() != alphabet)
                    throw std::invalid_argument("categorical model: ragged alphabet");
                double sum = 0.0;
                for (double p : row) {
                    if (!(p >= 0.0) || p > 1.0)
                        throw std::invalid_argument("categorical model: probabilities must lie in [0,1]");
                    sum += p;
                }
                if (std::fabs(sum - 1.0) > 1e-12)
                    throw std::invalid_argument("categorical model: row does not sum to 1");
            }
        }
    }

    std::size_t agent_count() const { return probs_.size(); }
    const HypothesisSpace& hypotheses() const { return hypotheses_; }
    std::size_t alphabet_size(std::size_t agent) const { return probs_[agent].front().size(); }

    double probability(std::size_t agent, std::size_t theta, std::size_t symbol) const {
        return probs_[agent][theta][symbol];
    }

    Observation sample(std::size_t agent, std::size_t theta, RandomStream& rng) const {
        return rng.categorical(probs_[agent][theta]);
    }

    double log_likelihood(std::size_t agent, Observation symbol, std::size_t theta) const {
        const double p = probs_[agent][theta][symbol];
        return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }

    double llr(std::size_t agent, Observation symbol, std::size_t theta0, std::size_t theta) const {
        const double p0 = probs_[agent][theta0][symbol];
        if (p0 <= 0.0)
            throw std::domain_error("llr: observation has zero likelihood under the true hypothesis");
        const double p1 = probs_[agent][theta][symbol];
        if (p1 <= 0.0) return std::numeric_limits<double>::infinity();
        return std::log(p0) - std::log(p1);
    }

    double divergence(std::size_t agent, std::size_t theta0, std::size_t theta) const {
        double acc = 0.0;
        for (std::size_t s = 0; s < alphabet_size(agent); ++s) {
            const double p = probs_[agent][theta0][s];
            if (p <= 0.0) continue;
            const double q = probs_[agent][theta][s];
            if (q <= 0.0) return std::numeric_limits<double>::infinity();
            acc += p * std::log(p / q);
        }
        return acc;
    }

    double log_mgf(std::size_t agent, double t, std::size_t theta0, std::size_t theta) const {
        Vector terms;
        for (std::size_t s = 0; s < alphabet_size(agent); ++s) {
            const double p = probs_[agent][theta0][s];
            if (p <= 0.0) continue;
            const double x = llr(agent, s, theta0, theta);
            if (std::isinf(x)) {
                if (t > 0.0) throw std::domain_error("log_mgf: moment generating function is infinite");
                if (t == 0.0) terms.push_back(std::log(p));
                continue;  // t < 0 sends the term to zero
            }
            terms.push_back(std::log(p) + t * x);
        }
        return log_sum_exp(terms);
    }

    // Tilted pmf proportional to p(s) * exp(t * llr(s)); the normalizer is
    // exactly the MGF.
    Vector tilted_pmf(std::size_t agent, double t, std::size_t theta0, std::size_t theta) const {
        const double log_norm = log_mgf(agent, t, theta0, theta);
        Vector pmf(alphabet_size(agent), 0.0);
        for (std::size_t s = 0; s < pmf.size(); ++s) {
            const double p = probs_[agent][theta0][s];
            if (p <= 0.0) continue;
            const double x = llr(agent, s, theta0, theta);
            if (std::isinf(x)) continue;  // only reachable for t < 0
            pmf[s] = std::exp(std::log(p) + t * x - log_norm);
        }
        return pmf;
    }

    Observation sample_tilted(std::size_t agent, double t, std::size_t theta0, std::size_t theta,
                              RandomStream& rng) const {
        const Vector pmf = tilted_pmf(agent, t, theta0, theta);
        return rng.categorical(pmf);
    }

private:
    HypothesisSpace hypotheses_;
    std::vector<std::vector<std::vector<double>>> probs_;  // [agent][hypothesis][symbol]
};

using DivergenceVector = Vector;

// d_k = KL(L_k(.|theta0) || L_k(.|theta)), in nats. Entries can be +inf when
// absolute continuity fails; finiteness is a precondition of the rate results
// and is reported by the callers that need it.
template <class Model>
DivergenceVector divergence_vector(const Model& model, std::size_t theta0, std::size_t theta) {
    DivergenceVector d(model.agent_count());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = model.divergence(k, theta0, theta);
    return d;
}

template <class Model>
bool divergences_finite(const Model& model) {
    const std::size_t t0 = model.hypotheses().true_index;
    for (std::size_t theta : model.hypotheses().alternatives())
        for (std::size_t k = 0; k < model.agent_count(); ++k)
            if (!std::isfinite(model.divergence(k, t0, theta))) return false;
    return true;
}

// Global identifiability: every alternative is distinguishable from the truth
// by at least one agent.
template <class Model>
bool is_identifiable(const Model& model, std::size_t theta0) {
    for (std::size_t theta = 0; theta < model.hypotheses().size(); ++theta) {
        if (theta == theta0) continue;
        bool informative = false;
        for (std::size_t k = 0; k < model.agent_count() && !informative; ++k)
            if (model.divergence(k, theta0, theta) > 0.0) informative = true;
        if (!informative) return false;
    }
    return true;
}

template <class Model>
bool is_identifiable(const Model& model) {
    return is_identifiable(model, model.hypotheses().true_index);
}

// E[exp(t x_k)] in the linear domain; prefer log_mgf for arithmetic.
template <class Model>
double llr_mgf(const Model& model, std::size_t agent, double t, std::size_t theta0,
               std::size_t theta) {
    return std::exp(model.log_mgf(agent, t, theta0, theta));
}

}  // namespace slearn
