#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <iostream>
#include <random>

#include "aif/srp.hpp"
#include "aif/verify.hpp"

using namespace aif;

TEST_CASE("adwin stays stable on a constant stream") {
    AdwinDetector det(0.002);
    for (int i = 0; i < 1000; ++i) CHECK(det.update(0.5) == DriftStatus::stable);
    CHECK(det.window_mean() == doctest::Approx(0.5));
}

TEST_CASE("adwin detects a mean shift quickly") {
    AdwinDetector det(0.002);
    for (int i = 0; i < 500; ++i) CHECK(det.update(0.0) != DriftStatus::drift);
    int detect_at = -1;
    for (int i = 1; i <= 200; ++i) {
        if (det.update(1.0) == DriftStatus::drift) {
            detect_at = i;
            break;
        }
    }
    REQUIRE(detect_at > 0);
    CHECK(detect_at <= 64);
    // Drift drops the older sub-window at a bucket boundary: the window
    // shrinks hard and its mean moves toward the new level.
    CHECK(det.window_length() < 100);
    CHECK(det.window_mean() > 0.2);
}

TEST_CASE("adwin ignores a mean-stationary alternating stream") {
    AdwinDetector det(0.002);
    for (int i = 0; i < 1000; ++i)
        CHECK(det.update(i % 2 == 0 ? 0.0 : 1.0) != DriftStatus::drift);
}

TEST_CASE("adwin respects the window cap and bucket bound") {
    AdwinDetector det(0.002, 4096);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) det.update(unif(rng));
    CHECK(det.window_length() <= 4096);
    // Exponential histogram: O(log window) rows of bounded width.
    CHECK(det.bucket_count() <= 80);
}

TEST_CASE("adwin window statistics match a direct recomputation") {
    AdwinDetector det(0.01, 4096);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    std::vector<double> values;
    for (int i = 0; i < 300; ++i) {
        const double v = unif(rng);
        values.push_back(v);
        det.update(v);
    }
    // No drift on a stationary uniform stream, so the window holds everything.
    REQUIRE(det.window_length() == values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    CHECK(det.window_mean() == doctest::Approx(mean).epsilon(1e-9));
    CHECK(det.window_variance() == doctest::Approx(var).epsilon(1e-6));
}

TEST_CASE("hoeffding tree learns a step function") {
    TreeConfig cfg;
    HoeffdingTreeRegressor tree(cfg, {0});
    std::mt19937_64 rng(3);
    for (int i = 0; i < 3000; ++i) {
        const double x = static_cast<double>(rng() % 100) / 10.0;
        tree.learn(std::vector<double>{x}, x < 5.0 ? 1.0 : 9.0);
    }
    CHECK(tree.leaf_count() >= 2);
    CHECK(tree.predict(std::vector<double>{2.0}) == doctest::Approx(1.0).epsilon(0.2));
    CHECK(tree.predict(std::vector<double>{8.0}) == doctest::Approx(9.0).epsilon(0.2));
}

TEST_CASE("untrained predictors return zero") {
    SrpConfig cfg;
    SrpEnsemble ens(cfg, 3, 42);
    CHECK(srp_predict(ens, std::vector<double>{1.0, 2.0, 3.0}) == 0.0);
    CHECK(estimate_intercept(ens, 3) == 0.0);
    CHECK_THROWS_AS(estimate_intercept(ens, 2), DimensionError);
    CHECK_THROWS_AS(srp_predict(ens, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("constant target ensemble predicts the constant") {
    SrpConfig cfg;
    SrpEnsemble ens(cfg, 2, 7);
    for (int i = 0; i < 200; ++i) ens.learn(Instance{{0.0, 0.0}, 30.0});
    CHECK(ens.predict(std::vector<double>{0.0, 0.0}) == doctest::Approx(30.0));
}

TEST_CASE("poisson zero rate trains nothing but feeds detectors") {
    SrpConfig cfg;
    cfg.poisson_lambda = 0.0;
    SrpEnsemble ens(cfg, 1, 5);
    for (int i = 0; i < 100; ++i) ens.learn(Instance{{1.0}, 10.0});
    // No training happened, so predictions stay at the cold-start zero.
    CHECK(ens.predict(std::vector<double>{1.0}) == 0.0);
}

TEST_CASE("linear stream recovery and prediction accuracy") {
    SrpConfig cfg;
    SrpEnsemble ens(cfg, 1, 2024);
    std::mt19937_64 rng(515);
    for (int i = 0; i < 2000; ++i) {
        const double q = static_cast<double>(rng() % 11);
        ens.learn(Instance{{q}, 30.0 - q});
    }
    for (int q = 0; q <= 10; ++q) {
        const double pred = ens.predict(std::vector<double>{static_cast<double>(q)});
        CHECK(std::abs(pred - (30.0 - q)) <= 1.0);
    }
    const double a_hat = ens.estimate_intercept();
    CHECK(a_hat >= 28.0);
    CHECK(a_hat <= 32.0);
}

TEST_CASE("ensemble size is invariant under drifts") {
    SrpConfig cfg;
    cfg.n_learners = 7;
    SrpEnsemble ens(cfg, 2, 99);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 800; ++i) {
        const double q = static_cast<double>(rng() % 11);
        const double level = i < 400 ? 30.0 : 60.0;
        ens.learn(Instance{{q, 10.0 - q}, level - q});
    }
    CHECK(ens.n_learners() == 7);
    CHECK(ens.drift_count() >= 1);
}

TEST_CASE("determinism: same seed, same stream, same predictions") {
    auto run = [](std::uint64_t seed) {
        SrpConfig cfg;
        SrpEnsemble ens(cfg, 2, seed);
        std::mt19937_64 rng(33);
        std::vector<double> preds;
        for (int i = 0; i < 500; ++i) {
            const double a = static_cast<double>(rng() % 11);
            const double b = static_cast<double>(rng() % 11);
            ens.learn(Instance{{a, b}, 30.0 - a - b});
            preds.push_back(ens.predict(std::vector<double>{a, b}));
        }
        return preds;
    };
    const std::vector<double> p1 = run(12345);
    const std::vector<double> p2 = run(12345);
    CHECK(p1 == p2); // bit-identical
    const std::vector<double> p3 = run(54321);
    CHECK(p1 != p3);
}

TEST_CASE("stationary stream error is non-increasing over blocks") {
    SrpConfig cfg;
    SrpEnsemble ens(cfg, 2, 4);
    std::mt19937_64 rng(21);
    std::vector<double> block_mae;
    double acc = 0.0;
    int count = 0;
    for (int i = 0; i < 1600; ++i) {
        const double a = static_cast<double>(rng() % 11);
        const double b = static_cast<double>(rng() % 11);
        const double target = 30.0 - a - b;
        acc += std::abs(ens.predict(std::vector<double>{a, b}) - target);
        ++count;
        ens.learn(Instance{{a, b}, target});
        if (count == 200) {
            block_mae.push_back(acc / 200.0);
            acc = 0.0;
            count = 0;
        }
    }
    for (std::size_t k = 1; k < block_mae.size(); ++k)
        CHECK(block_mae[k] <= block_mae[k - 1] * 1.10 + 1e-9);
}

TEST_CASE("subspace masks activate above the feature threshold") {
    SrpConfig cfg;
    cfg.max_features = 3;
    SrpEnsemble wide(cfg, 6, 8);
    const std::string state = wide.dump_state();
    // With 6 features and m=3 every learner sees exactly 3 features.
    CHECK(state.find("\"mask\": [") != std::string::npos);
    for (int i = 0; i < 50; ++i)
        wide.learn(Instance{{1, 2, 3, 4, 5, 6}, 10.0});
    CHECK(wide.predict(std::vector<double>{1, 2, 3, 4, 5, 6}) ==
          doctest::Approx(10.0));
}

TEST_CASE("regime shift moves the intercept and raises a drift") {
    CHECK(verify_srp_suite(2025, std::cout));
}
