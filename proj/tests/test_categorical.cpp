#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aif/categorical.hpp"

using namespace aif;

TEST_CASE("normalize basics") {
    CHECK(normalize(std::vector<double>{2, 2}).probs == std::vector<double>{0.5, 0.5});
    CHECK(normalize(std::vector<double>{1, 0, 0}).probs ==
          std::vector<double>{1, 0, 0});
    CHECK_THROWS_AS(normalize(std::vector<double>{0, 0}), NormalizationError);
    CHECK_THROWS_AS(normalize(std::vector<double>{1, -1}), NormalizationError);
    CHECK_THROWS_AS(normalize(std::vector<double>{}), NormalizationError);
}

TEST_CASE("kl divergence analytic cases") {
    Categorical p({0.3, 0.7});
    CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kl_divergence(Categorical({1, 0}), Categorical({0.5, 0.5})) ==
          doctest::Approx(std::log(2.0)));
    CHECK(std::isinf(kl_divergence(Categorical({0.5, 0.5}), Categorical({1, 0}))));
}

TEST_CASE("kl divergence is non-negative on random pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const int n = 2 + static_cast<int>(rng() % 9);
        std::vector<double> a(n), b(n);
        for (int k = 0; k < n; ++k) {
            a[k] = unif(rng) + 1e-3;
            b[k] = unif(rng) + 1e-3;
        }
        const double kl = kl_divergence(normalize(a), normalize(b));
        CHECK(kl >= 0.0);
    }
}

TEST_CASE("softmax analytic cases") {
    const Categorical sym = softmax(std::vector<double>{0, 0}, 1.0);
    CHECK(sym[0] == doctest::Approx(0.5));

    const Categorical sharp = softmax(std::vector<double>{1, 0}, 200.0);
    CHECK(sharp[0] > 1.0 - 1e-12);

    const Categorical thirds = softmax(std::vector<double>{std::log(2.0), 0.0}, 1.0);
    CHECK(thirds[0] == doctest::Approx(2.0 / 3.0));
    CHECK(thirds[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax is invariant to constant shifts") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + static_cast<int>(rng() % 6);
        std::vector<double> v(n), shifted(n);
        const double c = unif(rng);
        for (int k = 0; k < n; ++k) {
            v[k] = unif(rng);
            shifted[k] = v[k] + c;
        }
        const Categorical a = softmax(v, 3.0);
        const Categorical b = softmax(shifted, 3.0);
        for (int k = 0; k < n; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    }
}

TEST_CASE("entropy analytic cases") {
    CHECK(entropy(Categorical({1, 0})) == doctest::Approx(0.0));
    CHECK(entropy(Categorical::uniform(7)) == doctest::Approx(std::log(7.0)));
    CHECK(entropy(Categorical({0.5, 0.5})) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("discretized gaussian shape") {
    const Categorical delta = discretized_gaussian(2.0, 0.01, 5);
    CHECK(delta[2] > 0.999);

    const Categorical sym = discretized_gaussian(2.0, 1.0, 5);
    CHECK(sym[1] == doctest::Approx(sym[3]).epsilon(1e-12));
    CHECK(sym[0] == doctest::Approx(sym[4]).epsilon(1e-12));
    CHECK(sym.argmax() == 2);

    // Closed form: entries strictly decreasing away from a center at 0.
    const Categorical tail = discretized_gaussian(0.0, 2.0, 11);
    double expected_sum = 0.0;
    std::vector<double> expected(11);
    for (int i = 0; i < 11; ++i) {
        expected[i] = std::exp(-(i * i) / (2.0 * 4.0));
        expected_sum += expected[i];
    }
    for (int i = 0; i < 11; ++i)
        CHECK(tail[i] == doctest::Approx(expected[i] / expected_sum).epsilon(1e-12));
    for (int i = 1; i < 11; ++i) CHECK(tail[i] < tail[i - 1]);

    CHECK_THROWS_AS(discretized_gaussian(0.0, 0.0, 5), ParameterError);
    CHECK_THROWS_AS(discretized_gaussian(0.0, -1.0, 5), ParameterError);
}

TEST_CASE("discretized gaussian reflection symmetry at the midpoint") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> sig(0.2, 4.0);
    for (int i = 0; i < 50; ++i) {
        const int n = 3 + static_cast<int>(rng() % 9);
        const double mid = (n - 1) / 2.0;
        const Categorical g = discretized_gaussian(mid, sig(rng), n);
        for (int k = 0; k < n; ++k)
            CHECK(g[k] == doctest::Approx(g[n - 1 - k]).epsilon(1e-12));
    }
}

TEST_CASE("far-off-support center still normalizes") {
    const Categorical g = discretized_gaussian(-50.0, 0.01, 5);
    CHECK(g.is_valid());
    CHECK(g.argmax() == 0);
}

TEST_CASE("cpt column access and validation") {
    Cpt cpt(3, {2, 2});
    CHECK(cpt.n_conditions() == 4);
    cpt.set_column(cpt.condition_index(std::vector<int>{0, 0}),
                   std::vector<double>{1, 0, 0});
    cpt.set_column(cpt.condition_index(std::vector<int>{0, 1}),
                   std::vector<double>{0, 1, 0});
    cpt.set_column(cpt.condition_index(std::vector<int>{1, 0}),
                   std::vector<double>{0.2, 0.3, 0.5});
    cpt.set_column(cpt.condition_index(std::vector<int>{1, 1}),
                   std::vector<double>{0.25, 0.25, 0.5});
    CHECK_NOTHROW(cpt.validate());
    CHECK(cpt.at(2, std::vector<int>{1, 0}) == doctest::Approx(0.5));

    cpt.set_column(0, std::vector<double>{0.5, 0.1, 0.1});
    CHECK_THROWS_AS(cpt.validate(), NormalizationError);
}
