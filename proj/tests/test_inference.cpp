#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aif/inference.hpp"
#include "aif/verify.hpp"

using namespace aif;

namespace {

// Single-factor model with hand-set tables.
GenerativeModel tiny_model(const Cpt& a, const Cpt& b, const Categorical& d,
                           int horizon = 1) {
    GenerativeModel gm;
    gm.spec.factors = {{"s", b.outcome_card, 0}};
    gm.spec.modalities = {{"o", a.outcome_card}};
    gm.spec.controls = {{"u", b.condition_cards[1]}};
    gm.spec.horizon = horizon;
    gm.A = {a};
    gm.B = {b};
    gm.C = {std::vector<double>(static_cast<std::size_t>(a.outcome_card), 0.0)};
    gm.D = {d};
    gm.validate();
    gm.refresh_entropy_cache();
    return gm;
}

Cpt identity_cpt(int n) {
    Cpt cpt(n, {n});
    for (int i = 0; i < n; ++i)
        cpt.set_column(static_cast<std::size_t>(i),
                       Categorical::delta(static_cast<std::size_t>(n),
                                          static_cast<std::size_t>(i))
                           .probs);
    return cpt;
}

Cpt uniform_cpt(int outcomes, std::vector<int> conds) {
    Cpt cpt(outcomes, std::move(conds));
    for (std::size_t c = 0; c < cpt.n_conditions(); ++c)
        cpt.set_column(c, Categorical::uniform(static_cast<std::size_t>(outcomes)).probs);
    return cpt;
}

Cpt stay_put_b(int n) {
    Cpt b(n, {n, 1});
    for (int i = 0; i < n; ++i)
        b.set_column(b.condition_index(std::vector<int>{i, 0}),
                     Categorical::delta(static_cast<std::size_t>(n),
                                        static_cast<std::size_t>(i))
                         .probs);
    return b;
}

} // namespace

TEST_CASE("identity likelihood pins the posterior on the observation") {
    GenerativeModel gm = tiny_model(identity_cpt(4), stay_put_b(4),
                                    Categorical::uniform(4));
    gm.spec.controls = {{"u", 1}};
    const Belief post = infer_states(gm, Belief::from_priors(gm.D), {0}, {2}, {});
    CHECK(post.factors[0].argmax() == 2);
    CHECK(post.factors[0][2] > 1.0 - 1e-9);
    CHECK(post.converged);
}

TEST_CASE("uniform likelihood returns the predictive prior") {
    Cpt b(3, {3, 1});
    b.set_column(b.condition_index(std::vector<int>{0, 0}),
                 std::vector<double>{0.2, 0.5, 0.3});
    b.set_column(b.condition_index(std::vector<int>{1, 0}),
                 std::vector<double>{0.1, 0.8, 0.1});
    b.set_column(b.condition_index(std::vector<int>{2, 0}),
                 std::vector<double>{0.3, 0.3, 0.4});
    GenerativeModel gm = tiny_model(uniform_cpt(4, {3}), b, Categorical({0.5, 0.25, 0.25}));
    const Belief post = infer_states(gm, Belief::from_priors(gm.D), {0}, {1}, {});

    // Predictive prior by hand: B applied to D.
    std::vector<double> expected(3, 0.0);
    for (int s = 0; s < 3; ++s) {
        for (int s2 = 0; s2 < 3; ++s2)
            expected[static_cast<std::size_t>(s2)] +=
                gm.D[0][static_cast<std::size_t>(s)] *
                b.at(s2, std::vector<int>{s, 0});
    }
    for (int s = 0; s < 3; ++s)
        CHECK(post.factors[0][static_cast<std::size_t>(s)] ==
              doctest::Approx(expected[static_cast<std::size_t>(s)]).epsilon(1e-9));
}

TEST_CASE("exact posterior oracle special cases") {
    SUBCASE("uniform likelihood keeps the predictive prior") {
        std::mt19937_64 rng(5);
        GenerativeModel gm = random_model(rng, {3, 4}, {2}, {2}, 1);
        gm.A[0] = uniform_cpt(2, {3, 4});
        gm.refresh_entropy_cache();
        const ExactPosterior post =
            exact_posterior(gm, Belief::from_priors(gm.D), {1}, {0});
        // Joint equals the product of the propagated priors.
        Belief prior = Belief::from_priors(gm.D);
        const Categorical f0 = propagate_factor(gm, 0, gm.D[0], {1});
        const Categorical f1 = propagate_factor(gm, 1, gm.D[1], {1});
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 4; ++c)
                CHECK(post.joint[static_cast<std::size_t>(a * 4 + c)] ==
                      doctest::Approx(f0[static_cast<std::size_t>(a)] *
                                      f1[static_cast<std::size_t>(c)])
                          .epsilon(1e-9));
    }
    SUBCASE("delta prior with identity likelihood is unmoved") {
        GenerativeModel gm =
            tiny_model(identity_cpt(3), stay_put_b(3), Categorical::delta(3, 1));
        const ExactPosterior post =
            exact_posterior(gm, Belief::from_priors(gm.D), {0}, {1});
        CHECK(post.marginals[0][1] == doctest::Approx(1.0));
    }
    SUBCASE("capacity guard") {
        std::mt19937_64 rng(5);
        GenerativeModel gm = random_model(rng, {8, 8, 8}, {2}, {2}, 1);
        CHECK_THROWS_AS(exact_posterior(gm, Belief::from_priors(gm.D), {0}, {0}, 100),
                        OracleCapacityError);
    }
}

TEST_CASE("variational posterior matches the oracle on random models") {
    // Single factor: mean field is exact.
    CHECK(verify_oracle_suite(42, std::cout, 30, 15));
}

TEST_CASE("random two-factor model example dimensions") {
    std::mt19937_64 rng(99);
    GenerativeModel gm = random_model(rng, {3, 4}, {2, 5}, {2, 3}, 1, 8.0);
    Belief prior = Belief::from_priors(gm.D);
    const Belief post = infer_states(gm, prior, {1, 2}, {1, 3}, {});
    const ExactPosterior exact = exact_posterior(gm, prior, {1, 2}, {1, 3});
    for (std::size_t f = 0; f < 2; ++f) {
        const double kl = kl_divergence(exact.marginals[f], post.factors[f]);
        CHECK(kl >= 0.0);
        CHECK(kl <= 0.05);
    }
}

TEST_CASE("vfe trace is non-increasing") {
    std::mt19937_64 rng(123);
    for (int i = 0; i < 40; ++i) {
        GenerativeModel gm = random_model(rng, {4, 3}, {3, 4}, {2, 2}, 1);
        const Belief post = infer_states(gm, Belief::from_priors(gm.D), {0, 1},
                                         {static_cast<int>(rng() % 3),
                                          static_cast<int>(rng() % 4)},
                                         {});
        REQUIRE(post.vfe_trace.size() >= 2);
        for (std::size_t k = 1; k < post.vfe_trace.size(); ++k)
            CHECK(post.vfe_trace[k] <= post.vfe_trace[k - 1] + 1e-9);
        CHECK(post.vfe == doctest::Approx(post.vfe_trace.back()));
    }
}

TEST_CASE("context inference") {
    std::mt19937_64 rng(7);
    GenerativeModel gm = random_model(rng, {3, 2}, {4}, {1}, 1);

    SUBCASE("deterministic evidence pins the context") {
        // Likelihood: observation 2 only possible under context level 1.
        for (int w = 0; w < 3; ++w) {
            gm.A[0].set_column(gm.A[0].condition_index(std::vector<int>{w, 0}),
                               std::vector<double>{0.4, 0.4, 0.0, 0.2});
            gm.A[0].set_column(gm.A[0].condition_index(std::vector<int>{w, 1}),
                               std::vector<double>{0.2, 0.2, 0.5, 0.1});
        }
        Belief belief = Belief::from_priors(
            {Categorical::uniform(3), Categorical::uniform(2)});
        const Categorical post = infer_context(gm, belief, 2, 1, 0);
        CHECK(post[1] > 1.0 - 1e-9);
    }

    SUBCASE("uninformative likelihood returns the prior") {
        for (int w = 0; w < 3; ++w) {
            for (int c = 0; c < 2; ++c)
                gm.A[0].set_column(gm.A[0].condition_index(std::vector<int>{w, c}),
                                   std::vector<double>{0.4, 0.3, 0.2, 0.1});
        }
        Belief belief = Belief::from_priors(
            {Categorical::uniform(3), Categorical({0.7, 0.3})});
        const Categorical post = infer_context(gm, belief, 1, 1, 0);
        CHECK(post[0] == doctest::Approx(0.7).epsilon(1e-9));
    }
}

TEST_CASE("context inference on the firm model flags out-of-control signals") {
    FirmModelParams p;
    GenerativeModel gm = build_firm_model(p);
    Belief belief = Belief::from_priors(
        {Categorical::uniform(11), Categorical::uniform(2), Categorical::delta(2, 0),
         Categorical::delta(7, 0)});
    const Categorical post = infer_context(gm, belief, 3);
    CHECK(post[kContextReduce] >= 0.99);
}

TEST_CASE("efe breakdown identities") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 20; ++i) {
        GenerativeModel gm = random_model(rng, {3}, {3}, {2}, 2);
        std::uniform_real_distribution<double> pref(-1.0, 1.0);
        for (auto& c : gm.C)
            for (double& v : c) v = pref(rng);
        Belief belief = Belief::from_priors(gm.D);
        for (const Policy& pol : enumerate_policies(gm.spec)) {
            const EfeBreakdown b = expected_free_energy(gm, belief, pol);
            CHECK(std::abs(b.total + (b.epistemic + b.pragmatic)) <= 1e-9);
            CHECK(b.epistemic >= -1e-12);
            REQUIRE(b.per_step.size() == 2);
        }
    }
}

TEST_CASE("uniform likelihood has zero epistemic value") {
    GenerativeModel gm = tiny_model(uniform_cpt(3, {4}), stay_put_b(4),
                                    Categorical::uniform(4));
    Cpt b(4, {4, 2});
    std::mt19937_64 rng(5);
    for (std::size_t c = 0; c < b.n_conditions(); ++c) {
        std::vector<double> col(4);
        for (double& v : col) v = static_cast<double>(rng() % 100) + 1.0;
        b.set_column(c, normalize(col).probs);
    }
    gm.B = {b};
    gm.spec.controls = {{"u", 2}};
    gm.validate();
    gm.refresh_entropy_cache();
    for (const Policy& pol : enumerate_policies(gm.spec)) {
        const EfeBreakdown out = expected_free_energy(gm, Belief::from_priors(gm.D), pol);
        CHECK(std::abs(out.epistemic) <= 1e-12);
    }
}

TEST_CASE("constant preferences leave ranking to the epistemic term") {
    std::mt19937_64 rng(31);
    GenerativeModel gm = random_model(rng, {3}, {4}, {3}, 1);
    for (auto& c : gm.C)
        for (double& v : c) v = 0.7; // constant utility
    Belief belief = Belief::from_priors(gm.D);
    const std::vector<Policy> policies = enumerate_policies(gm.spec);
    const PolicyPosterior post = infer_policies(gm, belief, policies, {});
    // All pragmatic terms equal the constant, so argmin follows epistemic.
    std::size_t best = 0;
    for (std::size_t k = 1; k < policies.size(); ++k) {
        if (post.breakdowns[k].epistemic > post.breakdowns[best].epistemic) best = k;
    }
    CHECK(post.q.argmax() == best);
    for (const auto& b : post.breakdowns)
        CHECK(b.pragmatic == doctest::Approx(post.breakdowns[0].pragmatic).epsilon(1e-9));
}

TEST_CASE("efe matches trajectory enumeration on toys") {
    CHECK(verify_efe_suite(9, std::cout, 10));
}

TEST_CASE("policy posterior softmax behavior") {
    std::mt19937_64 rng(17);
    GenerativeModel gm = random_model(rng, {2}, {2}, {2}, 1);
    Belief belief = Belief::from_priors(gm.D);
    const std::vector<Policy> policies = enumerate_policies(gm.spec);
    const PolicyPosterior post = infer_policies(gm, belief, policies, {});

    // Softmax of -gamma G recomputed by hand.
    InferenceConfig icfg;
    std::vector<double> neg_g;
    for (const auto& b : post.breakdowns) neg_g.push_back(-b.total);
    const Categorical expected = softmax(neg_g, icfg.policy_precision);
    for (std::size_t k = 0; k < policies.size(); ++k)
        CHECK(post.q[k] == doctest::Approx(expected[k]).epsilon(1e-12));

    // Scaling preferences by adding a constant does not move the argmax.
    GenerativeModel shifted = gm;
    for (auto& c : shifted.C)
        for (double& v : c) v += 3.25;
    const PolicyPosterior post2 = infer_policies(shifted, belief, policies, {});
    CHECK(post.q.argmax() == post2.q.argmax());
}

TEST_CASE("select action modes") {
    Policy p0{{{2, 0}}};
    Policy p1{{{5, 1}}};
    Policy p2{{{5, 1}}};
    const std::vector<Policy> policies{p0, p1, p2};

    InferenceConfig argmin_cfg;
    const JointAction a = select_action(Categorical({0.1, 0.6, 0.3}), policies,
                                        argmin_cfg, 0);
    CHECK(a == JointAction{5, 1});

    InferenceConfig sample_cfg;
    sample_cfg.selection_mode = SelectionMode::sample;
    // Two policies share the same first action: it must be drawn with
    // probability one.
    const JointAction b = select_action(Categorical({0.0, 0.5, 0.5}), policies,
                                        sample_cfg, 1234);
    CHECK(b == JointAction{5, 1});

    // Fixed seed, fixed posterior: identical draws.
    const JointAction c1 = select_action(Categorical({0.4, 0.3, 0.3}), policies,
                                         sample_cfg, 77);
    const JointAction c2 = select_action(Categorical({0.4, 0.3, 0.3}), policies,
                                         sample_cfg, 77);
    CHECK(c1 == c2);

    // Delta posterior always returns that policy's first action.
    const JointAction d = select_action(Categorical({1.0, 0.0, 0.0}), policies,
                                        sample_cfg, 9);
    CHECK(d == JointAction{2, 0});
}

TEST_CASE("non-convergence is flagged not fatal") {
    std::mt19937_64 rng(55);
    GenerativeModel gm = random_model(rng, {5, 5}, {5, 5}, {2, 2}, 1);
    InferenceConfig icfg;
    icfg.max_iterations = 1; // force an early stop
    icfg.convergence_tol = 1e-12;
    const Belief post = infer_states(gm, Belief::from_priors(gm.D), {0, 0}, {0, 0}, icfg);
    CHECK_FALSE(post.converged);
    CHECK(post.iterations == 1);
}
