#include "ivrauth/sequencer.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <tuple>

#include "ivrauth/csv_io.hpp"
#include "sha256.hpp"

namespace ivrauth {

void Thresholds::validate() const {
    if (!(accept_below >= 0.0 && accept_below < block_above && block_above <= 1.0))
        throw DataError("thresholds must satisfy 0 <= accept_below < block_above <= 1");
    if (max_steps < 1) throw DataError("max_steps must be at least 1");
    if (fpr_step_cap && !(*fpr_step_cap >= 0.0 && *fpr_step_cap <= 1.0))
        throw DataError("fpr_step_cap must lie in [0, 1]");
}

std::string_view to_string(Criterion c) {
    return c == Criterion::PassPosterior ? "pass-posterior" : "expected-posterior";
}

Criterion parse_criterion(std::string_view text) {
    if (text == "pass-posterior") return Criterion::PassPosterior;
    if (text == "expected-posterior") return Criterion::ExpectedPosterior;
    throw DataError("unknown criterion '" + std::string(text) + "'");
}

std::string_view to_string(ExhaustAction a) { return a == ExhaustAction::Block ? "block" : "escalate"; }

ExhaustAction parse_exhaust_action(std::string_view text) {
    if (text == "block") return ExhaustAction::Block;
    if (text == "escalate") return ExhaustAction::Escalate;
    throw DataError("unknown exhaust action '" + std::string(text) + "'");
}

std::string_view to_string(Action a) {
    switch (a) {
        case Action::Ask: return "ask";
        case Action::Accept: return "accept";
        case Action::Block: return "block";
    }
    return "?";
}

std::string_view to_string(NodeReason r) {
    switch (r) {
        case NodeReason::None: return "none";
        case NodeReason::AcceptThreshold: return "accept_threshold";
        case NodeReason::BlockThreshold: return "block_threshold";
        case NodeReason::Exhausted: return "exhausted";
        case NodeReason::MaxSteps: return "max_steps";
        case NodeReason::ImpossibleEvidence: return "impossible_evidence";
    }
    return "?";
}

std::vector<CandidateScore> score_candidates(const PatternCounts& counts, const EvidenceSet& evidence,
                                             BeliefMode mode, const SequencerOptions& opts,
                                             std::optional<double> prior_override) {
    const PosteriorOptions post_opts{mode, opts.min_support, false, prior_override};
    const std::size_t legit_here = counts.tally(evidence).legit;

    std::optional<double> current;
    if (opts.criterion == Criterion::ExpectedPosterior) {
        try {
            current = posterior(counts, evidence, {mode, opts.min_support, true, prior_override}).posterior;
        } catch (const DataError&) {
            return {};
        }
    }

    std::vector<CandidateScore> out;
    for (std::size_t c = 0; c < counts.schema().size(); ++c) {
        if (evidence.contains(c)) continue;
        const EvidenceSet if_pass = evidence.with(c, Observation::Pass);

        double pass_posterior = 0.0;
        try {
            pass_posterior = posterior(counts, if_pass, post_opts).posterior;
        } catch (const DataError&) {
            // Insufficient support, or a pass that is impossible under the model.
            continue;
        }

        double legit_fail = 0.0;
        if (mode == BeliefMode::EmpiricalJoint) {
            if (legit_here > 0) {
                const std::size_t legit_pass = counts.tally(if_pass).legit;
                legit_fail = static_cast<double>(legit_here - legit_pass) / static_cast<double>(legit_here);
            }
        } else {
            legit_fail = 1.0 - counts.class_conditional(c).p_pass_given_legit;
        }
        if (opts.thresholds.fpr_step_cap && legit_fail > *opts.thresholds.fpr_step_cap) continue;

        const double score = opts.criterion == Criterion::PassPosterior ? pass_posterior : *current;
        out.push_back({c, score, legit_fail});
    }

    const auto& schema = counts.schema();
    std::sort(out.begin(), out.end(), [&](const CandidateScore& a, const CandidateScore& b) {
        return std::forward_as_tuple(a.score, a.legit_fail_rate, schema[a.credential].name) <
               std::forward_as_tuple(b.score, b.legit_fail_rate, schema[b.credential].name);
    });
    return out;
}

std::optional<std::size_t> next_credential(const PatternCounts& counts, const EvidenceSet& evidence,
                                           BeliefMode mode, const SequencerOptions& opts,
                                           std::optional<double> prior_override) {
    const auto scores = score_candidates(counts, evidence, mode, opts, prior_override);
    if (scores.empty()) return std::nullopt;
    return scores.front().credential;
}

std::optional<CredentialId> next_credential(const Dataset& d, const Belief& belief,
                                            const SequencerOptions& opts) {
    const PatternCounts counts(d);
    EvidenceSet e;
    for (const auto& item : belief.evidence_trail) e = e.with(d.schema().index_of(item.credential.name), item.outcome);
    const auto next = next_credential(counts, e, belief.mode, opts);
    if (!next) return std::nullopt;
    return d.schema()[*next];
}

NodeDecision evaluate_node(const PatternCounts& counts, const EvidenceSet& evidence,
                           const SequencerOptions& opts, std::optional<double> prior_override) {
    NodeDecision n;
    const auto& t = opts.thresholds;
    try {
        const auto r = posterior(counts, evidence, {opts.mode, opts.min_support, true, prior_override});
        n.belief = r.posterior;
        n.mode = r.mode;
        n.support = r.support;
    } catch (const DataError&) {
        // Evidence with probability zero under both classes.
        n.belief = 1.0;
        n.mode = BeliefMode::NaiveIndependence;
        n.support = counts.tally(evidence).total();
        n.action = Action::Block;
        n.reason = NodeReason::ImpossibleEvidence;
        return n;
    }

    if (n.belief < t.accept_below) {
        n.action = Action::Accept;
        n.reason = NodeReason::AcceptThreshold;
        return n;
    }
    if (n.belief > t.block_above) {
        n.action = Action::Block;
        n.reason = NodeReason::BlockThreshold;
        return n;
    }
    if (evidence.size() >= t.max_steps) {
        n.action = Action::Block;
        n.reason = NodeReason::MaxSteps;
        n.escalate = opts.on_exhaust == ExhaustAction::Escalate;
        return n;
    }

    auto next = next_credential(counts, evidence, n.mode, opts, prior_override);
    if (!next && n.mode == BeliefMode::EmpiricalJoint) {
        next = next_credential(counts, evidence, BeliefMode::NaiveIndependence, opts, prior_override);
        n.selection_fallback = next.has_value();
    }
    if (!next) {
        n.action = Action::Block;
        n.reason = NodeReason::Exhausted;
        n.escalate = opts.on_exhaust == ExhaustAction::Escalate;
        return n;
    }
    n.action = Action::Ask;
    n.ask = next;
    return n;
}

Policy compile_policy(const Dataset& d, const SequencerOptions& opts) {
    if (d.n_total() == 0) throw DataError("empty dataset");
    opts.thresholds.validate();

    Policy p;
    p.counts = PatternCounts(d);
    p.options = opts;
    p.dataset_fingerprint = dataset_fingerprint(d);

    struct Pending {
        std::size_t id;
        EvidenceSet evidence;
    };
    std::deque<Pending> queue;
    p.nodes.push_back(PolicyNode{0, {}, {}, std::nullopt, std::nullopt});
    queue.push_back({0, EvidenceSet{}});

    while (!queue.empty()) {
        const Pending cur = queue.front();
        queue.pop_front();
        NodeDecision decision = evaluate_node(p.counts, cur.evidence, opts);
        p.nodes[cur.id].decision = decision;
        if (decision.action != Action::Ask) continue;

        const std::size_t c = *decision.ask;
        for (Observation o : {Observation::Pass, Observation::Fail}) {
            PolicyNode child;
            child.id = p.nodes.size();
            child.trail = p.nodes[cur.id].trail;
            child.trail.push_back({p.schema()[c], o});
            if (o == Observation::Pass) p.nodes[cur.id].on_pass = child.id;
            else p.nodes[cur.id].on_fail = child.id;
            queue.push_back({child.id, cur.evidence.with(c, o)});
            p.nodes.push_back(std::move(child));
        }
    }
    return p;
}

std::string dataset_fingerprint(const Dataset& d) {
    std::ostringstream csv;
    write_csv(d, csv);
    return detail::sha256_hex(csv.str());
}

SessionResult run_session(const Policy& p, const CredentialOracle& oracle) {
    SessionResult r;
    const PolicyNode* node = &p.root();
    while (node->decision.action == Action::Ask) {
        const CredentialId& cred = p.schema()[*node->decision.ask];
        const Observation o = oracle(cred);
        r.trail.push_back({cred, o});
        node = &p.nodes[o == Observation::Pass ? *node->on_pass : *node->on_fail];
    }
    r.decision = node->decision.action;
    r.steps_taken = r.trail.size();
    r.final_posterior = node->decision.belief;
    r.node_id = node->id;
    r.escalated = node->decision.escalate;
    return r;
}

BacktestSummary backtest(const Dataset& d_eval, const Policy& p) {
    std::vector<std::size_t> eval_index;
    for (const auto& c : p.schema().credentials()) {
        const auto i = d_eval.schema().find(c.name);
        if (!i) throw DataError("evaluation dataset lacks policy credential '" + c.name + "'");
        eval_index.push_back(*i);
    }

    BacktestSummary s;
    s.n_total = d_eval.n_total();
    s.n_fraud = d_eval.n_fraud();
    for (const auto& rec : d_eval.records()) {
        const auto oracle = [&](const CredentialId& c) {
            const Outcome o = rec.outcomes[eval_index[p.schema().index_of(c.name)]];
            return o == Outcome::Pass ? Observation::Pass : Observation::Fail;
        };
        const auto r = run_session(p, oracle);
        s.total_steps += r.steps_taken;
        if (r.decision == Action::Accept) {
            ++s.accepted;
            s.fraud_accepted += rec.is_fraud;
        } else {
            ++s.blocked;
            s.escalated += r.escalated;
            if (rec.is_fraud) ++s.fraud_blocked;
            else ++s.legit_blocked;
        }
    }

    const std::size_t n_legit = s.n_total - s.n_fraud;
    if (s.n_fraud > 0) s.fraud_block_rate = static_cast<double>(s.fraud_blocked) / static_cast<double>(s.n_fraud);
    if (n_legit > 0) s.legit_block_rate = static_cast<double>(s.legit_blocked) / static_cast<double>(n_legit);
    if (s.n_total > 0) s.mean_steps = static_cast<double>(s.total_steps) / static_cast<double>(s.n_total);
    if (s.accepted > 0)
        s.accept_fraud_rate = static_cast<double>(s.fraud_accepted) / static_cast<double>(s.accepted);
    return s;
}

}  // namespace ivrauth
