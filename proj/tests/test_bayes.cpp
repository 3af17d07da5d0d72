#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ivrauth/bayes.hpp"
#include "ivrauth/estimator.hpp"
#include "oracles.hpp"

using namespace ivrauth;

namespace {

// A,B credentials: evidence (A pass, B fail) matches rows 0, 1, 4, 7.
Dataset eight_rows() {
    return oracle::from_rows(Schema{"A", "B"}, {"PF1", "PM1", "PP1", "MP1", "PF0", "PP0", "FF0", "PF0"});
}

std::vector<EvidenceItem> a_pass_b_fail() {
    return {{{"A"}, Observation::Pass}, {{"B"}, Observation::Fail}};
}

PosteriorOptions empirical(std::size_t min_support = 1) {
    return {BeliefMode::EmpiricalJoint, min_support, false, std::nullopt};
}

PosteriorOptions naive() { return {BeliefMode::NaiveIndependence, 1, false, std::nullopt}; }

}  // namespace

TEST_SUITE("bayes-engine") {

TEST_CASE("bayes_update and total_probability hand values") {
    CHECK(bayes_update(0.5, 0.2, 0.8) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(total_probability(0.25, 0.8, 0.4) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(total_probability(0.0, 0.9, 0.3) == doctest::Approx(0.3));
    CHECK(bayes_update(0.0, 0.9, 0.3) == 0.0);
    CHECK(bayes_update(1.0, 0.9, 0.3) == 1.0);
    CHECK_THROWS_WITH_AS(bayes_update(0.3, 0.0, 0.0), "impossible evidence", DataError);
    CHECK_THROWS_AS(bayes_update(1.0, 0.0, 0.7), DataError);
}

TEST_CASE("worked example: weak first credential") {
    // Prior 3.88%, fraud pass A 85.9% of the time -> about 4.49% after a pass.
    const double prior = 0.0388;
    const double lik_fraud = 0.0449 * 0.859 / prior;
    const double lik_legit = (0.859 - prior * lik_fraud) / (1 - prior);
    CHECK(bayes_update(prior, lik_fraud, lik_legit) == doctest::Approx(0.0449).epsilon(1e-9));
}

TEST_CASE("bayes update equals fraud-rate-given-pass on random datasets") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const auto d = oracle::random_dataset(rng, 1 + trial % 5, 1 + static_cast<std::size_t>(trial % 35));
        const double prior = prior_fraud(d);
        for (const auto& s : credential_stats(d)) {
            if (!s.fraud_rate_given_pass) continue;
            const double b = bayes_update(prior, s.class_conditional.p_pass_given_fraud, s.class_conditional.p_pass_given_legit);
            CHECK(std::abs(b - *s.fraud_rate_given_pass) <= 1e-12);
        }
    }
}

TEST_CASE("empirical joint on the eight-record set") {
    const auto b = sequential_posterior(eight_rows(), a_pass_b_fail(), empirical());
    CHECK(b.posterior_fraud == 0.5);
    CHECK(b.support == 4);
    CHECK(b.mode == BeliefMode::EmpiricalJoint);
    CHECK(b.evidence_trail == a_pass_b_fail());
}

TEST_CASE("naive independence on the eight-record set") {
    // P(A|F)=3/4, P(B fail|F)=2/4, P(A|L)=3/4, P(B fail|L)=3/4, prior 1/2 -> 0.4
    const auto b = sequential_posterior(eight_rows(), a_pass_b_fail(), naive());
    CHECK(b.posterior_fraud == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(b.mode == BeliefMode::NaiveIndependence);
}

TEST_CASE("naive mode is invariant to evidence order") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        const auto d = oracle::random_dataset(rng, 4, 60);
        std::vector<EvidenceItem> ev;
        std::bernoulli_distribution coin(0.5);
        for (std::size_t i = 0; i < 4; ++i)
            if (coin(rng) || ev.empty()) ev.push_back({d.schema()[i], coin(rng) ? Observation::Pass : Observation::Fail});
        double first = 0;
        bool have = false;
        std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.credential < b.credential; });
        do {
            try {
                const double p = sequential_posterior(d, ev, naive()).posterior_fraud;
                if (have) CHECK(p == first);
                first = p;
                have = true;
            } catch (const DataError&) {
                CHECK_FALSE(have);
            }
        } while (std::next_permutation(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.credential < b.credential; }));
    }
}

TEST_CASE("empirical joint agrees with the counting oracle") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = oracle::random_dataset(rng, 4, 32);
        std::vector<EvidenceItem> ev;
        std::vector<oracle::Ev> oev;
        std::bernoulli_distribution coin(0.5);
        for (std::size_t i = 0; i < 4; ++i) {
            if (!coin(rng)) continue;
            const bool pass = coin(rng);
            ev.push_back({d.schema()[i], pass ? Observation::Pass : Observation::Fail});
            oev.push_back({i, pass});
        }
        if (ev.empty()) continue;
        const auto expected = oracle::joint_posterior(d.records(), oev);
        if (expected) {
            CHECK(sequential_posterior(d, ev, empirical()).posterior_fraud == *expected);
        } else {
            CHECK_THROWS_AS(sequential_posterior(d, ev, empirical()), InsufficientSupport);
        }
    }
}

TEST_CASE("support floor and fallback") {
    const auto d = eight_rows();
    try {
        sequential_posterior(d, a_pass_b_fail(), empirical(5));
        FAIL("expected InsufficientSupport");
    } catch (const InsufficientSupport& e) {
        CHECK(e.support() == 4);
    }
    const auto b = sequential_posterior(d, a_pass_b_fail(), {BeliefMode::EmpiricalJoint, 5, true, std::nullopt});
    CHECK(b.mode == BeliefMode::NaiveIndependence);
    CHECK(b.posterior_fraud == doctest::Approx(0.4));
    CHECK(sequential_posterior(d, a_pass_b_fail(), empirical(4)).mode == BeliefMode::EmpiricalJoint);
}

TEST_CASE("min_support zero still refuses an empty match") {
    const auto d = oracle::from_rows(Schema{"A"}, {"P1", "P0"});
    CHECK_THROWS_AS(sequential_posterior(d, std::vector<EvidenceItem>{{{"A"}, Observation::Fail}}, empirical(0)),
                    InsufficientSupport);
}

TEST_CASE("evidence validation") {
    const auto d = eight_rows();
    CHECK_THROWS_AS(sequential_posterior(d, std::vector<EvidenceItem>{}, empirical()), DataError);
    CHECK_THROWS_AS(sequential_posterior(d, std::vector<EvidenceItem>{{{"Z"}, Observation::Pass}}, empirical()), DataError);
    CHECK_THROWS_AS(sequential_posterior(d, std::vector<EvidenceItem>{{{"A"}, Observation::Pass}, {{"A"}, Observation::Fail}}, empirical()),
                    DataError);
}

TEST_CASE("prior override") {
    const auto d = eight_rows();
    const std::vector<EvidenceItem> a{{{"A"}, Observation::Pass}};
    // Empirical likelihoods of A pass: 3/4 for both classes, so the override survives unchanged.
    CHECK(sequential_posterior(d, a, {BeliefMode::EmpiricalJoint, 1, false, 0.1}).posterior_fraud == doctest::Approx(0.1));
    const auto b = sequential_posterior(d, a_pass_b_fail(), {BeliefMode::NaiveIndependence, 1, false, 0.25});
    // Likelihood ratio 0.375 / 0.5625 = 2/3 applied to odds 1/3 -> 2/9 odds.
    CHECK(b.posterior_fraud == doctest::Approx(2.0 / 11.0));
}

TEST_CASE("pattern counts match the dataset") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = oracle::random_dataset(rng, 5, 50);
        const PatternCounts pc(d);
        CHECK(pc.n_fraud() == d.n_fraud());
        CHECK(pc.n_total() == d.n_total());
        for (std::size_t i = 0; i < 5; ++i) {
            const auto a = pc.class_conditional(i);
            const auto b = class_conditional(d, i);
            CHECK(a.p_pass_given_fraud == b.p_pass_given_fraud);
            CHECK(a.p_pass_given_legit == b.p_pass_given_legit);
        }
        const PatternCounts rebuilt(d.schema(), pc.entries());
        CHECK(rebuilt.entries().size() == pc.entries().size());
    }
    CHECK_THROWS_AS(PatternCounts(Schema{"A"}, {{0b10, 1, 0}}), DataError);
}

}
