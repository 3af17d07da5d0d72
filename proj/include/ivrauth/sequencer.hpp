#pragma once
// Adaptive credential ordering.
//
// A Policy is a binary decision tree compiled greedily from a Dataset. Each
// node holds the fraud belief given the outcomes observed on the path to it
// and one action:
//   Accept  belief < accept_below
//   Block   belief > block_above, or no further credential can be asked
//   Ask(c)  otherwise; c minimizes P(fraud | path, c = pass)
//
// Node evaluation is a pure function of (pattern counts, evidence set,
// options), shared by the compiler and the scoring service.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ivrauth/bayes.hpp"
#include "ivrauth/model.hpp"

namespace ivrauth {

struct Thresholds {
    double accept_below = 0.001;
    double block_above = 0.5;
    std::size_t max_steps = 10;
    // Candidates whose legit failure rate given the evidence exceeds this
    // are not asked.
    std::optional<double> fpr_step_cap;

    // Throws DataError unless 0 <= accept_below < block_above <= 1 and
    // max_steps >= 1.
    void validate() const;
};

// PassPosterior ranks candidates by P(F | evidence, c = pass).
// ExpectedPosterior averages over both outcomes; that expectation equals the
// current belief for every candidate, so the choice falls to the
// tie-breakers (legit failure rate, then name).
enum class Criterion { PassPosterior, ExpectedPosterior };

std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view text);  // "pass-posterior" | "expected-posterior"

// Label for terminal Blocks caused by running out of credentials or steps.
enum class ExhaustAction { Block, Escalate };

std::string_view to_string(ExhaustAction a);
ExhaustAction parse_exhaust_action(std::string_view text);

struct SequencerOptions {
    Thresholds thresholds;
    BeliefMode mode = BeliefMode::EmpiricalJoint;
    std::size_t min_support = 30;
    Criterion criterion = Criterion::PassPosterior;
    ExhaustAction on_exhaust = ExhaustAction::Block;
};

struct CandidateScore {
    std::size_t credential = 0;
    double score = 0.0;            // criterion value, lower is better
    double legit_fail_rate = 0.0;  // P(c not passed | legit, evidence)
};

// Scores every unasked, eligible candidate. In EmpiricalJoint mode a
// candidate is eligible only if at least max(min_support, 1) records match
// the evidence plus c = pass. Sorted best first.
std::vector<CandidateScore> score_candidates(const PatternCounts& counts, const EvidenceSet& evidence,
                                             BeliefMode mode, const SequencerOptions& opts,
                                             std::optional<double> prior_override = std::nullopt);

std::optional<std::size_t> next_credential(const PatternCounts& counts, const EvidenceSet& evidence,
                                           BeliefMode mode, const SequencerOptions& opts,
                                           std::optional<double> prior_override = std::nullopt);

// Convenience form: the asked set is the belief's evidence trail.
std::optional<CredentialId> next_credential(const Dataset& d, const Belief& belief,
                                            const SequencerOptions& opts);

enum class Action { Ask, Accept, Block };
enum class NodeReason { None, AcceptThreshold, BlockThreshold, Exhausted, MaxSteps, ImpossibleEvidence };

std::string_view to_string(Action a);
std::string_view to_string(NodeReason r);

struct NodeDecision {
    double belief = 0.0;
    BeliefMode mode = BeliefMode::EmpiricalJoint;  // mode that produced belief
    std::size_t support = 0;
    Action action = Action::Block;
    std::optional<std::size_t> ask;
    NodeReason reason = NodeReason::None;
    bool selection_fallback = false;  // next credential chosen in naive mode
    bool escalate = false;
};

NodeDecision evaluate_node(const PatternCounts& counts, const EvidenceSet& evidence,
                           const SequencerOptions& opts, std::optional<double> prior_override = std::nullopt);

struct PolicyNode {
    std::size_t id = 0;
    std::vector<EvidenceItem> trail;  // in ask order
    NodeDecision decision;
    std::optional<std::size_t> on_pass;
    std::optional<std::size_t> on_fail;

    std::size_t depth() const { return trail.size(); }
};

struct Policy {
    PatternCounts counts;
    SequencerOptions options;
    std::string dataset_fingerprint;
    std::vector<PolicyNode> nodes;  // breadth-first; nodes[0] is the root

    const Schema& schema() const { return counts.schema(); }
    const PolicyNode& root() const { return nodes.front(); }
    double prior() const { return counts.prior(); }
};

// Throws DataError on an empty dataset or invalid thresholds.
Policy compile_policy(const Dataset& d, const SequencerOptions& opts = {});

// SHA-256 of the dataset's CSV serialization, hex encoded.
std::string dataset_fingerprint(const Dataset& d);

struct SessionResult {
    Action decision = Action::Block;  // Accept or Block
    std::size_t steps_taken = 0;
    double final_posterior = 0.0;
    std::vector<EvidenceItem> trail;
    std::size_t node_id = 0;
    bool escalated = false;
};

using CredentialOracle = std::function<Observation(const CredentialId&)>;

SessionResult run_session(const Policy& p, const CredentialOracle& oracle);

struct BacktestSummary {
    std::size_t n_total = 0;
    std::size_t n_fraud = 0;
    std::size_t accepted = 0;
    std::size_t blocked = 0;
    std::size_t escalated = 0;  // subset of blocked
    std::size_t fraud_blocked = 0;
    std::size_t legit_blocked = 0;
    std::size_t fraud_accepted = 0;
    std::size_t total_steps = 0;

    double fraud_block_rate = 0.0;
    double legit_block_rate = 0.0;
    double mean_steps = 0.0;
    std::optional<double> accept_fraud_rate;  // fraud among accepted
};

// Replays every record; Missing is answered as Fail. The evaluation schema
// must contain every policy credential (matched by name).
BacktestSummary backtest(const Dataset& d_eval, const Policy& p);

}  // namespace ivrauth
