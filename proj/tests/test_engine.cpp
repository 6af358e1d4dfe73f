#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "slearn/engine.hpp"
#include "slearn/graph.hpp"
#include "slearn/models.hpp"
#include "slearn/network.hpp"

using namespace slearn;
using testutil::matrix_from;

namespace {

const Vector kBenchmarkNu = {3, 8, 0, 0, 3, 0, 3, 0, 0, 0};

GaussianModel benchmark_model() { return GaussianModel::binary_shift(kBenchmarkNu); }

CombinationMatrix benchmark_matrix() { return lazy_metropolis(presets::ten_node_benchmark()); }

double belief_logsumexp(const BeliefState& b, std::size_t agent) {
    return log_sum_exp(b.log_belief[agent]);
}

}  // namespace

TEST_CASE("adapt with equal likelihoods keeps the prior") {
    const auto model = GaussianModel::binary_shift({0.0});  // identical under both hypotheses
    auto beliefs = BeliefState::uniform(1, 2);
    beliefs = adapt(beliefs, {1.234}, model);
    CHECK(beliefs.mu(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(beliefs.mu(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("adapt is bayes rule for a unit log-likelihood ratio") {
    // gaussian with llr(x) = -x + 1/2, so x = -1/2 gives llr exactly 1
    const auto model = GaussianModel::binary_shift({1.0});
    auto beliefs = BeliefState::uniform(1, 2);
    beliefs = adapt(beliefs, {-0.5}, model);
    const double e = std::exp(1.0);
    CHECK(beliefs.mu(0, 0) == doctest::Approx(e / (1.0 + e)).epsilon(1e-14));
    CHECK(beliefs.mu(0, 1) == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-14));
}

TEST_CASE("adapt keeps degenerate-leaning beliefs normalized in the log domain") {
    const auto model = GaussianModel::binary_shift({3.0});
    auto beliefs = BeliefState::from_prior(1, {1.0, 1e-300});
    CHECK(std::fabs(belief_logsumexp(beliefs, 0)) <= 1e-10);
    for (int i = 0; i < 50; ++i) {
        beliefs = adapt(beliefs, {0.0}, model);
        CHECK(std::fabs(belief_logsumexp(beliefs, 0)) <= 1e-10);
    }
    // the ratio kept growing even though mu(theta1) underflows linearly
    CHECK(beliefs.log_mu(0, 0) - beliefs.log_mu(0, 1) > 690.0);
}

TEST_CASE("adapt rejects an observation with zero likelihood everywhere") {
    const CategoricalModel model(HypothesisSpace({"a", "b"}, 0),
                                 {{{1.0, 0.0}, {1.0, 0.0}}});
    auto beliefs = BeliefState::uniform(1, 2);
    CHECK_THROWS_AS(adapt(beliefs, {std::size_t{1}}, model), std::domain_error);
}

TEST_CASE("draw neighbors follows a deterministic column") {
    const auto a = matrix_from({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
    RandomStream rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto d = draw_neighbors(a, rng);
        for (std::size_t k = 0; k < 3; ++k) CHECK(d.chosen[k] == 2);
    }
}

TEST_CASE("draw neighbors frequencies match the column distribution") {
    const auto a = matrix_from({{0.5, 0.5}, {0.5, 0.5}});
    RandomStream rng(17);
    std::size_t count = 0;
    const std::size_t n = 100'000;
    for (std::size_t i = 0; i < n; ++i)
        if (draw_neighbors(a, rng).chosen[0] == 1) ++count;
    CHECK(std::fabs(static_cast<double>(count) / n - 0.5) < 0.01);
}

TEST_CASE("empirical mean of the draw matrix is the combination matrix") {
    const auto a = benchmark_matrix();
    const std::size_t n = 100'000;
    Matrix freq(10, 10, 0.0);
    RandomStream rng(29);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = draw_neighbors(a, rng);
        for (std::size_t k = 0; k < 10; ++k) freq(d.chosen[k], k) += 1.0;
    }
    for (std::size_t l = 0; l < 10; ++l)
        for (std::size_t k = 0; k < 10; ++k)
            CHECK(std::fabs(freq(l, k) / n - a(l, k)) < 0.01);
}

TEST_CASE("combine with alpha zero copies the chosen neighbor") {
    auto psi = BeliefState::uniform(2, 2);
    psi.log_belief[0] = {std::log(0.8), std::log(0.2)};
    psi.log_belief[1] = {std::log(0.3), std::log(0.7)};
    NeighborDraw draw{{1, 1}};
    const auto out = combine(psi, draw, 0.0);
    CHECK(out.mu(0, 0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(out.mu(1, 0) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("combine of identical beliefs is a fixed point for any alpha") {
    auto psi = BeliefState::uniform(2, 3);
    psi.log_belief[0] = psi.log_belief[1] = {std::log(0.2), std::log(0.3), std::log(0.5)};
    NeighborDraw draw{{1, 0}};
    for (double alpha : {0.0, 0.4, 0.9}) {
        const auto out = combine(psi, draw, alpha);
        for (std::size_t h = 0; h < 3; ++h)
            CHECK(out.log_mu(0, h) == doctest::Approx(psi.log_mu(0, h)).epsilon(1e-13));
    }
}

TEST_CASE("combine with alpha one half averages opposed beliefs to uniform") {
    auto psi = BeliefState::uniform(2, 2);
    psi.log_belief[0] = {std::log(0.8), std::log(0.2)};
    psi.log_belief[1] = {std::log(0.2), std::log(0.8)};
    NeighborDraw draw{{1, 0}};
    const auto out = combine(psi, draw, 0.5);
    CHECK(out.mu(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(out.mu(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("combine supports per-agent confidence weights") {
    auto psi = BeliefState::uniform(2, 2);
    psi.log_belief[0] = {std::log(0.8), std::log(0.2)};
    psi.log_belief[1] = {std::log(0.2), std::log(0.8)};
    NeighborDraw draw{{1, 0}};
    SimConfig cfg;
    cfg.alphas = {0.0, 0.5};
    const auto out = combine(psi, draw, cfg);
    CHECK(out.mu(0, 0) == doctest::Approx(0.2).epsilon(1e-14));  // replaced
    CHECK(out.mu(1, 0) == doctest::Approx(0.5).epsilon(1e-14));  // averaged
}

TEST_CASE("single agent run is a plain random walk of llrs") {
    const auto model = GaussianModel::binary_shift({2.0});
    const auto a = Matrix::identity(1);
    SimConfig cfg;
    cfg.horizon = 200;
    cfg.seed = 3;
    cfg.record_llrs = true;
    const auto traj = run(model, a, cfg);
    double cumulative = 0.0;
    for (std::size_t step = 1; step <= cfg.horizon; ++step) {
        cumulative += traj.llr_at(step, 0, 0);
        CHECK(traj.lambda_at(step, 0, 0) == doctest::Approx(cumulative).epsilon(1e-12));
    }
}

TEST_CASE("zero-divergence model keeps beliefs diffuse") {
    const auto model = GaussianModel::binary_shift({0.0, 0.0, 0.0});
    const auto a = lazy_metropolis(Graph::ring(3));
    SimConfig cfg;
    cfg.horizon = 500;
    cfg.seed = 9;
    const auto traj = run(model, a, cfg);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(traj.lambda_at(cfg.horizon, k, 0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(traj.mu_true_at(cfg.horizon, k) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("run rejects models whose log-belief ratios diverge") {
    // support gap: symbol 1 has positive probability under the truth only
    const CategoricalModel leaky(HypothesisSpace({"a", "b"}, 0),
                                 {{{0.5, 0.5}, {1.0, 0.0}}});
    SimConfig cfg;
    cfg.horizon = 200;
    cfg.seed = 8;
    CHECK_THROWS_AS(run(leaky, Matrix::identity(1), cfg), std::domain_error);
}

TEST_CASE("belief-domain lambdas satisfy the log-ratio recursion") {
    const auto model = benchmark_model();
    const auto a = benchmark_matrix();
    for (double alpha : {0.0, 0.3, 0.7, 0.9}) {
        SimConfig cfg;
        cfg.alphas = {alpha};
        cfg.horizon = 500;
        cfg.seed = 101;
        cfg.record_draws = true;
        cfg.record_llrs = true;
        const auto traj = run(model, a, cfg);
        const auto check = lambda_recursion_check(traj);
        INFO("alpha = ", alpha, ", max diff = ", check.max_abs_diff);
        CHECK(check.ok);
    }
}

TEST_CASE("recursion check reports the location of a corrupted entry") {
    const auto model = benchmark_model();
    const auto a = benchmark_matrix();
    SimConfig cfg;
    cfg.horizon = 50;
    cfg.seed = 77;
    cfg.record_draws = true;
    cfg.record_llrs = true;
    auto traj = run(model, a, cfg);
    const std::size_t step = 20, agent = 4;
    traj.lambda[((step - 1) * traj.agent_count + agent) * traj.alt_count()] += 1.0;
    const auto check = lambda_recursion_check(traj);
    CHECK_FALSE(check.ok);
    CHECK(check.step == step);
    CHECK(check.agent == agent);
}

TEST_CASE("recursion check requires recorded draws and llrs") {
    const auto model = benchmark_model();
    SimConfig cfg;
    cfg.horizon = 5;
    const auto traj = run(model, benchmark_matrix(), cfg);
    CHECK_THROWS(lambda_recursion_check(traj));
}

TEST_CASE("simplex preservation over random steps") {
    const CategoricalModel model(HypothesisSpace({"a", "b", "c"}, 0),
                                 {{{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}, {0.3, 0.2, 0.5}},
                                  {{0.6, 0.2, 0.2}, {0.2, 0.6, 0.2}, {0.25, 0.25, 0.5}}});
    const auto a = matrix_from({{0.6, 0.3}, {0.4, 0.7}});
    RandomStream rng(55);
    auto beliefs = BeliefState::uniform(2, 3);
    for (int step = 0; step < 1000; ++step) {
        std::vector<std::size_t> obs(2);
        for (std::size_t k = 0; k < 2; ++k) obs[k] = model.sample(k, 0, rng);
        beliefs = adapt(beliefs, obs, model);
        for (std::size_t k = 0; k < 2; ++k) CHECK(std::fabs(belief_logsumexp(beliefs, k)) <= 1e-10);
        beliefs = combine(beliefs, draw_neighbors(a, rng), 0.3);
        for (std::size_t k = 0; k < 2; ++k) CHECK(std::fabs(belief_logsumexp(beliefs, k)) <= 1e-10);
    }
}

TEST_CASE("replacement pull sources form a markov chain with kernel A") {
    const auto a = benchmark_matrix();
    RandomStream rng(111);
    Matrix transitions(10, 10, 0.0);
    Vector visits(10, 0.0);
    std::size_t state = 0;
    const std::size_t steps = 100'000;
    for (std::size_t i = 0; i < steps; ++i) {
        const auto draw = draw_neighbors(a, rng);
        const std::size_t next = draw.chosen[state];
        transitions(state, next) += 1.0;
        visits[state] += 1.0;
        state = next;
    }
    for (std::size_t m = 0; m < 10; ++m) {
        REQUIRE(visits[m] > 0.0);
        for (std::size_t l = 0; l < 10; ++l)
            CHECK(std::fabs(transitions(m, l) / visits[m] - a(l, m)) < 0.02);
    }
}

TEST_CASE("truth learning on the benchmark setup") {
    const auto model = benchmark_model();
    const auto a = benchmark_matrix();
    for (double alpha : {0.0, 0.5}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            SimConfig cfg;
            cfg.alphas = {alpha};
            cfg.horizon = 2500;
            cfg.seed = seed;
            const auto traj = run(model, a, cfg);
            for (std::size_t k = 0; k < 10; ++k) CHECK(traj.mu_true_at(2500, k) > 0.99);
        }
    }
}

TEST_CASE("identical config and seed give identical trajectories") {
    const auto model = benchmark_model();
    const auto a = benchmark_matrix();
    SimConfig cfg;
    cfg.alphas = {0.3};
    cfg.horizon = 300;
    cfg.seed = 2024;
    cfg.record_draws = true;
    cfg.record_llrs = true;
    const auto t1 = run(model, a, cfg);
    const auto t2 = run(model, a, cfg);
    CHECK(t1.lambda == t2.lambda);
    CHECK(t1.mu_true == t2.mu_true);
    CHECK(t1.draws == t2.draws);
    CHECK(t1.llrs == t2.llrs);
    std::ostringstream s1, s2;
    write_trajectory_csv(t1, s1);
    write_trajectory_csv(t2, s2);
    CHECK(s1.str() == s2.str());
    SimConfig other = cfg;
    other.seed = 2025;
    const auto t3 = run(model, a, other);
    CHECK(t1.lambda != t3.lambda);
}

TEST_CASE("trajectory csv has only a header at horizon zero") {
    const auto model = benchmark_model();
    SimConfig cfg;
    cfg.horizon = 0;
    const auto traj = run(model, benchmark_matrix(), cfg);
    std::ostringstream out;
    write_trajectory_csv(traj, out);
    CHECK(out.str() == "step,agent,theta_index,lambda,mu_true\n");
}

TEST_CASE("weight average diagnostic trivial cases") {
    SUBCASE("single agent") {
        const auto avg = weight_average_diagnostic(Matrix::identity(1), 0.5, 100, 42);
        REQUIRE(avg.size() == 1);
        CHECK(avg[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("one step at alpha zero is the indicator of the first draw") {
        const auto a = matrix_from({{0.5, 0.5}, {0.5, 0.5}});
        const std::uint64_t seed = 13;
        const auto avg = weight_average_diagnostic(a, 0.0, 1, seed);
        RandomStream replay(seed);
        const std::size_t l = draw_from_column(a, 0, replay);
        for (std::size_t k = 0; k < 2; ++k) CHECK(avg[k] == (k == l ? 1.0 : 0.0));
    }
}

TEST_CASE("weight average diagnostic approaches the perron vector") {
    const auto a = benchmark_matrix();
    const Vector pi(10, 0.1);
    for (double alpha : {0.0, 0.5}) {
        double total = 0.0;
        const int seeds = 5;
        for (int s = 0; s < seeds; ++s)
            total += l1_distance(weight_average_diagnostic(a, alpha, 10'000, 900 + s), pi);
        CHECK(total / seeds <= 0.1);
    }
}
