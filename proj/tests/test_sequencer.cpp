#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "ivrauth/sequencer.hpp"
#include "oracles.hpp"

using namespace ivrauth;

namespace {

Dataset xyz() {
    return oracle::from_rows(Schema{"X", "Y", "Z"},
                             {"PPF1", "PFP1", "FPP1", "PPP0", "PPF0", "PFP0", "FPP0", "PFF0", "FFP0", "PPP0"});
}

SequencerOptions xyz_options() {
    SequencerOptions o;
    o.thresholds.accept_below = 0.26;
    o.thresholds.block_above = 0.35;
    o.thresholds.max_steps = 2;
    o.min_support = 1;
    return o;
}

std::vector<EvidenceItem> trail(std::initializer_list<std::pair<const char*, Observation>> items) {
    std::vector<EvidenceItem> out;
    for (const auto& [name, obs] : items) out.push_back({{name}, obs});
    return out;
}

constexpr auto P = Observation::Pass;
constexpr auto F = Observation::Fail;

}  // namespace

TEST_SUITE("sequencer") {

TEST_CASE("hand compiled tree") {
    const auto p = compile_policy(xyz(), xyz_options());
    REQUIRE(p.nodes.size() == 7);
    const auto& n = p.nodes;

    CHECK(n[0].decision.belief == doctest::Approx(0.3));
    CHECK(n[0].decision.action == Action::Ask);
    CHECK(*n[0].decision.ask == 0);
    CHECK(n[0].on_pass == 1u);
    CHECK(n[0].on_fail == 2u);

    CHECK(n[1].trail == trail({{"X", P}}));
    CHECK(n[1].decision.belief == doctest::Approx(2.0 / 7.0));
    CHECK(*n[1].decision.ask == 1);
    CHECK(n[1].on_pass == 3u);
    CHECK(n[1].on_fail == 4u);

    CHECK(n[2].trail == trail({{"X", F}}));
    CHECK(n[2].decision.belief == doctest::Approx(1.0 / 3.0));
    CHECK(*n[2].decision.ask == 2);
    CHECK(n[2].on_pass == 5u);
    CHECK(n[2].on_fail == 6u);

    CHECK(n[3].trail == trail({{"X", P}, {"Y", P}}));
    CHECK(n[3].decision.belief == doctest::Approx(0.25));
    CHECK(n[3].decision.action == Action::Accept);
    CHECK(n[3].decision.reason == NodeReason::AcceptThreshold);

    CHECK(n[4].decision.belief == doctest::Approx(1.0 / 3.0));
    CHECK(n[4].decision.action == Action::Block);
    CHECK(n[4].decision.reason == NodeReason::MaxSteps);

    CHECK(n[5].trail == trail({{"X", F}, {"Z", P}}));
    CHECK(n[5].decision.reason == NodeReason::MaxSteps);

    CHECK(n[6].trail == trail({{"X", F}, {"Z", F}}));
    CHECK(n[6].decision.mode == BeliefMode::NaiveIndependence);
    CHECK(n[6].decision.belief == doctest::Approx(7.0 / 19.0));
    CHECK(n[6].decision.reason == NodeReason::BlockThreshold);
    for (const auto& node : n) {
        if (node.decision.action != Action::Ask) {
            CHECK_FALSE(node.on_pass.has_value());
            CHECK_FALSE(node.on_fail.has_value());
        }
    }
}

TEST_CASE("hand tree backtest") {
    const auto s = backtest(xyz(), compile_policy(xyz(), xyz_options()));
    CHECK(s.n_total == 10);
    CHECK(s.accepted == 4);
    CHECK(s.blocked == 6);
    CHECK(s.fraud_block_rate == doctest::Approx(2.0 / 3.0));
    CHECK(s.legit_block_rate == doctest::Approx(4.0 / 7.0));
    CHECK(s.mean_steps == 2.0);
    REQUIRE(s.accept_fraud_rate);
    CHECK(*s.accept_fraud_rate == 0.25);
    CHECK(s.escalated == 0);
}

TEST_CASE("run_session follows the oracle") {
    const auto p = compile_policy(xyz(), xyz_options());
    const auto all_fail = run_session(p, [](const CredentialId&) { return F; });
    CHECK(all_fail.decision == Action::Block);
    CHECK(all_fail.trail == trail({{"X", F}, {"Z", F}}));
    CHECK(all_fail.node_id == 6);
    CHECK(all_fail.steps_taken == 2);
    const auto all_pass = run_session(p, [](const CredentialId&) { return P; });
    CHECK(all_pass.decision == Action::Accept);
    CHECK(all_pass.final_posterior == doctest::Approx(0.25));
}

TEST_CASE("escalate labels exhausted paths") {
    auto o = xyz_options();
    o.on_exhaust = ExhaustAction::Escalate;
    const auto p = compile_policy(xyz(), o);
    CHECK(p.nodes[4].decision.escalate);
    CHECK_FALSE(p.nodes[6].decision.escalate);
    CHECK(backtest(xyz(), p).escalated > 0);
}

TEST_CASE("next credential agrees with the exhaustive oracle") {
    std::mt19937_64 rng(55);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = oracle::random_dataset(rng, 4, 1 + static_cast<std::size_t>(trial % 32));
        std::vector<std::string> names;
        for (const auto& c : d.schema().credentials()) names.push_back(c.name);
        std::vector<oracle::Ev> oev;
        EvidenceSet e;
        for (std::size_t i = 0; i < 4; ++i) {
            if (!coin(rng)) continue;
            const bool pass = coin(rng);
            oev.push_back({i, pass});
            e = e.with(i, pass ? P : F);
        }
        const std::size_t min_support = trial % 3;
        SequencerOptions o;
        o.min_support = min_support;
        const auto got = next_credential(PatternCounts(d), e, BeliefMode::EmpiricalJoint, o);
        CHECK(got == oracle::next_credential(d.records(), names, oev, min_support));
    }
}

TEST_CASE("fpr step cap removes high-friction candidates") {
    auto o = xyz_options();
    o.thresholds.fpr_step_cap = 0.2;
    const auto scores = score_candidates(PatternCounts(xyz()), EvidenceSet{}, BeliefMode::EmpiricalJoint, o);
    for (const auto& s : scores) CHECK(s.legit_fail_rate <= 0.2);
    // Every candidate fails 2/7 of legit callers at the root.
    CHECK(scores.empty());
    const auto p = compile_policy(xyz(), o);
    CHECK(p.nodes.size() == 1);
    CHECK(p.root().decision.reason == NodeReason::Exhausted);
}

TEST_CASE("expected-posterior criterion falls through to tie-breakers") {
    auto o = xyz_options();
    o.criterion = Criterion::ExpectedPosterior;
    const auto scores = score_candidates(PatternCounts(xyz()), EvidenceSet{}, BeliefMode::EmpiricalJoint, o);
    REQUIRE(scores.size() == 3);
    for (const auto& s : scores) CHECK(s.score == doctest::Approx(0.3));
    CHECK(scores[0].legit_fail_rate <= scores[1].legit_fail_rate);
}

TEST_CASE("threshold validation") {
    auto o = xyz_options();
    o.thresholds.accept_below = 0.6;
    CHECK_THROWS_AS(compile_policy(xyz(), o), DataError);
    o = xyz_options();
    o.thresholds.max_steps = 0;
    CHECK_THROWS_AS(compile_policy(xyz(), o), DataError);
    CHECK_THROWS_AS(compile_policy(Dataset(Schema{"X"}, {}), xyz_options()), DataError);
}

TEST_CASE("regenerated dataset: G follows a pass on A") {
    const auto& d = fixtures::regenerated_dataset();
    Belief b = sequential_posterior(d, trail({{"A", P}}));
    const auto next = next_credential(d, b, SequencerOptions{});
    REQUIRE(next);
    CHECK(next->name == "G");
}

TEST_CASE("regenerated dataset: default policy starts with G") {
    const auto p = compile_policy(fixtures::regenerated_dataset());
    REQUIRE(p.root().decision.ask);
    CHECK(p.schema()[*p.root().decision.ask].name == "G");
    for (const auto& node : p.nodes) CHECK(node.depth() <= 10);
}

TEST_CASE("compile is deterministic") {
    const auto a = compile_policy(fixtures::regenerated_dataset());
    const auto b = compile_policy(fixtures::regenerated_dataset());
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].trail == b.nodes[i].trail);
        CHECK(a.nodes[i].decision.belief == b.nodes[i].decision.belief);
    }
    CHECK(a.dataset_fingerprint == dataset_fingerprint(fixtures::regenerated_dataset()));
}

TEST_CASE("backtest rejects a schema missing a policy credential") {
    const auto p = compile_policy(xyz(), xyz_options());
    const auto other = oracle::from_rows(Schema{"X", "Y"}, {"PP1"});
    CHECK_THROWS_AS(backtest(other, p), DataError);
}

}
