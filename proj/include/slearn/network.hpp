#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "slearn/graph.hpp"
#include "slearn/matrix.hpp"

namespace slearn {

// a(l, k) = probability that agent k pulls from agent l; columns sum to 1.
using CombinationMatrix = Matrix;
using PerronVector = Vector;

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;

    void fail(std::string msg) {
        ok = false;
        violations.push_back(std::move(msg));
    }
};

constexpr double kStochasticTol = 1e-12;

namespace detail {

// Reachability over the directed positive-support graph of A. forward=true
// follows k -> l for a(l,k) > 0, forward=false the reverse.
inline std::size_t reach_count(const Matrix& a, bool forward) {
    const std::size_t n = a.rows();
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w = 0; w < n; ++w) {
            const double entry = forward ? a(w, v) : a(v, w);
            if (entry > 0.0 && !seen[w]) {
                seen[w] = true;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count;
}

}  // namespace detail

inline bool strongly_connected(const Matrix& a) {
    if (a.rows() == 0) return false;
    return detail::reach_count(a, true) == a.rows() && detail::reach_count(a, false) == a.rows();
}

// Checks the combination-matrix conditions: entries in [0,1], left-stochastic
// columns, strong connectivity of the positive support, and at least one
// positive self-loop. Violations go into the report, they are not faults.
inline ValidationReport validate(const CombinationMatrix& a) {
    ValidationReport report;
    if (!a.square() || a.rows() == 0) {
        report.fail("matrix must be square and non-empty");
        return report;
    }
    const std::size_t n = a.rows();

    bool finite = true, in_range = true;
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t k = 0; k < n; ++k) {
            const double v = a(l, k);
            if (!std::isfinite(v)) finite = false;
            if (v < 0.0 || v > 1.0) in_range = false;
        }
    if (!finite) {
        report.fail("matrix has non-finite entries");
        return report;
    }
    if (!in_range) report.fail("entries must lie in [0,1]");

    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t l = 0; l < n; ++l) sum += a(l, k);
        if (std::fabs(sum - 1.0) > kStochasticTol) {
            report.fail("column " + std::to_string(k + 1) + " sums to " + std::to_string(sum) +
                        ", expected 1");
        }
    }

    if (!strongly_connected(a)) report.fail("positive-support graph is not strongly connected");

    bool has_self_loop = false;
    for (std::size_t k = 0; k < n; ++k)
        if (a(k, k) > 0.0) has_self_loop = true;
    if (!has_self_loop) report.fail("no agent has a positive self-selection probability");

    return report;
}

// Lazy Metropolis combination matrix: b(l,k) = 1/max(deg l, deg k) on edges,
// diagonal fills the column, and A = I/2 + B/2. Symmetric and doubly
// stochastic for any connected graph.
inline CombinationMatrix lazy_metropolis(const Graph& g) {
    if (!g.connected()) throw std::invalid_argument("lazy_metropolis: graph must be connected");
    const std::size_t n = g.node_count;
    const auto deg = g.degrees();
    Matrix b(n, n, 0.0);
    for (auto [i, j] : g.edges) {
        const double w = 1.0 / static_cast<double>(std::max(deg[i], deg[j]));
        b(i, j) = w;
        b(j, i) = w;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) off += b(i, j);
        b(i, i) = 1.0 - off;
    }
    Matrix a(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * b(i, j) + (i == j ? 0.5 : 0.0);
    return a;
}

// Power iteration for the Perron vector: A pi = pi, ||pi||_1 = 1. Starts from
// the uniform vector; primitivity under the validated conditions guarantees
// convergence.
inline PerronVector perron_vector(const CombinationMatrix& a, double tol = 1e-12,
                                  std::size_t max_iters = 1'000'000) {
    if (!a.square() || a.rows() == 0) throw std::invalid_argument("perron_vector: invalid matrix");
    const std::size_t n = a.rows();
    Vector pi(n, 1.0 / static_cast<double>(n));
    for (std::size_t it = 0; it < max_iters; ++it) {
        Vector next = mat_vec(a, pi);
        normalize_l1(next);
        if (l1_distance(mat_vec(a, next), next) <= tol) return next;
        pi = std::move(next);
    }
    throw std::runtime_error("perron_vector: power iteration did not converge");
}

// Per-agent confidence weights alpha_k in [0,1) fold into the effective
// matrix M = J + A(I-J), J = diag(alpha). M stays left-stochastic.
struct EffectiveMatrix {
    CombinationMatrix matrix;
    PerronVector perron;
};

inline EffectiveMatrix effective_matrix(const CombinationMatrix& a, const Vector& alphas,
                                        double tol = 1e-12) {
    const std::size_t n = a.rows();
    if (alphas.size() != n) throw std::invalid_argument("effective_matrix: alpha size mismatch");
    for (double al : alphas)
        if (!(al >= 0.0 && al < 1.0))
            throw std::invalid_argument("effective_matrix: weights must lie in [0,1)");
    Matrix m(n, n, 0.0);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t k = 0; k < n; ++k)
            m(l, k) = a(l, k) * (1.0 - alphas[k]) + (l == k ? alphas[k] : 0.0);
    return EffectiveMatrix{m, perron_vector(m, tol)};
}

}  // namespace slearn
