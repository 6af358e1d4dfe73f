#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "slearn/models.hpp"
#include "slearn/rng.hpp"

using namespace slearn;

namespace {

const Vector kBenchmarkNu = {3, 8, 0, 0, 3, 0, 3, 0, 0, 0};

CategoricalModel two_symbol_model() {
    return CategoricalModel(HypothesisSpace({"h0", "h1"}, 0),
                            {{{0.9, 0.1}, {0.1, 0.9}}});
}

}  // namespace

TEST_CASE("hypothesis space invariants") {
    CHECK_THROWS(HypothesisSpace({"only"}, 0));
    CHECK_THROWS(HypothesisSpace({"a", "b"}, 2));
    const HypothesisSpace h({"a", "b", "c"}, 1);
    CHECK(h.alternatives() == std::vector<std::size_t>{0, 2});
}

TEST_CASE("categorical model construction rejects bad rows") {
    CHECK_THROWS(CategoricalModel(HypothesisSpace({"a", "b"}, 0), {{{0.5, 0.4}, {0.5, 0.5}}}));
    CHECK_THROWS(CategoricalModel(HypothesisSpace({"a", "b"}, 0), {{{1.1, -0.1}, {0.5, 0.5}}}));
    CHECK_THROWS(CategoricalModel(HypothesisSpace({"a", "b"}, 0), {{{0.5, 0.5}, {1.0}}}));
}

TEST_CASE("gaussian sampling matches its law") {
    const auto model = GaussianModel::binary_shift({0.0, 8.0});
    RandomStream rng(7);
    const std::size_t n = 100'000;

    SUBCASE("zero-mean agent") {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += model.sample(0, 0, rng);
        CHECK(std::fabs(sum / n) < 0.02);
    }
    SUBCASE("unit variance at mean 8") {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = model.sample(1, 1, rng);
            sum += x;
            sumsq += x * x;
        }
        const double mean = sum / n;
        CHECK(std::fabs(sumsq / n - mean * mean - 1.0) < 0.05);
    }
}

TEST_CASE("categorical sampling matches its frequencies") {
    const CategoricalModel model(HypothesisSpace({"a", "b"}, 0), {{{0.5, 0.5}, {0.2, 0.8}}});
    RandomStream rng(11);
    std::size_t count0 = 0;
    const std::size_t n = 100'000;
    for (std::size_t i = 0; i < n; ++i)
        if (model.sample(0, 0, rng) == 0) ++count0;
    CHECK(std::fabs(static_cast<double>(count0) / n - 0.5) < 0.01);
}

TEST_CASE("gaussian llr closed form") {
    const auto model = GaussianModel::binary_shift({3.0});
    CHECK(model.llr(0, 0.0, 0, 1) == doctest::Approx(4.5).epsilon(1e-15));
    // midpoint symmetry: xi = nu/2 makes both hypotheses equally likely
    CHECK(model.llr(0, 1.5, 0, 1) == doctest::Approx(0.0).epsilon(1e-15));
    // reverse pair flips the sign
    CHECK(model.llr(0, 0.0, 1, 0) == doctest::Approx(-4.5).epsilon(1e-15));
}

TEST_CASE("categorical llr and support handling") {
    const auto model = two_symbol_model();
    CHECK(model.llr(0, 0, 0, 1) == doctest::Approx(std::log(9.0)).epsilon(1e-14));
    const CategoricalModel gappy(HypothesisSpace({"a", "b"}, 0),
                                 {{{1.0, 0.0}, {0.5, 0.5}}});
    CHECK_THROWS_AS(gappy.llr(0, 1, 0, 1), std::domain_error);  // zero under the truth
    const CategoricalModel leaky(HypothesisSpace({"a", "b"}, 0),
                                 {{{0.5, 0.5}, {1.0, 0.0}}});
    CHECK(std::isinf(leaky.llr(0, 1, 0, 1)));  // absolute continuity violated
}

TEST_CASE("divergence vector of the benchmark setup") {
    const auto model = GaussianModel::binary_shift(kBenchmarkNu);
    const auto d = divergence_vector(model, 0, 1);
    const Vector expected = {4.5, 32, 0, 0, 4.5, 0, 4.5, 0, 0, 0};
    REQUIRE(d.size() == expected.size());
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] == expected[k]);
}

TEST_CASE("divergence of identical likelihoods is zero") {
    const auto model = GaussianModel::binary_shift({0.0, 0.0, 0.0});
    for (double v : divergence_vector(model, 0, 1)) CHECK(v == 0.0);
}

TEST_CASE("categorical divergence closed form") {
    const auto model = two_symbol_model();
    CHECK(divergence_vector(model, 0, 1)[0] == doctest::Approx(0.8 * std::log(9.0)).epsilon(1e-14));
}

TEST_CASE("infinite divergence is reported as such") {
    const CategoricalModel leaky(HypothesisSpace({"a", "b"}, 0), {{{0.5, 0.5}, {1.0, 0.0}}});
    CHECK(std::isinf(leaky.divergence(0, 0, 1)));
    CHECK_FALSE(divergences_finite(leaky));
    CHECK(divergences_finite(two_symbol_model()));
}

TEST_CASE("llr mgf identities at t = 0 and t = -1") {
    const auto gaussian = GaussianModel::binary_shift(kBenchmarkNu);
    for (std::size_t k = 0; k < gaussian.agent_count(); ++k) {
        CHECK(std::fabs(gaussian.log_mgf(k, 0.0, 0, 1)) <= 1e-10);
        CHECK(std::fabs(gaussian.log_mgf(k, -1.0, 0, 1)) <= 1e-10);
    }
    const CategoricalModel cat(HypothesisSpace({"a", "b", "c"}, 0),
                               {{{0.2, 0.3, 0.5}, {0.5, 0.25, 0.25}, {0.1, 0.6, 0.3}},
                                {{0.7, 0.2, 0.1}, {0.1, 0.2, 0.7}, {0.3, 0.3, 0.4}}});
    for (std::size_t k = 0; k < cat.agent_count(); ++k)
        for (std::size_t theta = 1; theta < 3; ++theta) {
            CHECK(std::fabs(cat.log_mgf(k, 0.0, 0, theta)) <= 1e-10);
            CHECK(std::fabs(cat.log_mgf(k, -1.0, 0, theta)) <= 1e-10);
        }
}

TEST_CASE("gaussian mgf closed-form value") {
    const auto model = GaussianModel::binary_shift({3.0});
    CHECK(llr_mgf(model, 0, 0.5, 0, 1) == doctest::Approx(std::exp(3.375)).epsilon(1e-12));
}

TEST_CASE("categorical mgf blows up only past the support gap") {
    const CategoricalModel leaky(HypothesisSpace({"a", "b"}, 0), {{{0.5, 0.5}, {1.0, 0.0}}});
    CHECK_THROWS_AS(leaky.log_mgf(0, 0.5, 0, 1), std::domain_error);
    CHECK(std::isfinite(leaky.log_mgf(0, -0.5, 0, 1)));
}

TEST_CASE("mgf derivative at zero recovers the divergence") {
    const double h = 1e-4;
    const auto gaussian = GaussianModel::binary_shift(kBenchmarkNu);
    for (std::size_t k = 0; k < gaussian.agent_count(); ++k) {
        const double deriv =
            (gaussian.log_mgf(k, h, 0, 1) - gaussian.log_mgf(k, -h, 0, 1)) / (2.0 * h);
        CHECK(std::fabs(deriv - gaussian.divergence(k, 0, 1)) <= 1e-6);
    }
    const auto cat = two_symbol_model();
    const double deriv = (cat.log_mgf(0, h, 0, 1) - cat.log_mgf(0, -h, 0, 1)) / (2.0 * h);
    CHECK(std::fabs(deriv - cat.divergence(0, 0, 1)) <= 1e-6);
}

TEST_CASE("monte carlo mean of the llr matches the divergence") {
    const auto model = GaussianModel::binary_shift({3.0});
    RandomStream rng(123);
    const std::size_t n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = model.llr(0, model.sample(0, 0, rng), 0, 1);
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    const double se = sd / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(mean - model.divergence(0, 0, 1)) <= 4.0 * se);
}

TEST_CASE("identifiability") {
    CHECK(is_identifiable(GaussianModel::binary_shift(kBenchmarkNu)));
    CHECK_FALSE(is_identifiable(GaussianModel::binary_shift({0.0, 0.0, 0.0})));
    CHECK(is_identifiable(GaussianModel::binary_shift({0.0, 0.0, 0.4})));  // one informative agent
    // must hold for every alternative, not just one
    const GaussianModel three(HypothesisSpace({"a", "b", "c"}, 0),
                              {{0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}});
    CHECK_FALSE(is_identifiable(three));
}
