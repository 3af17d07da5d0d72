#include "ivrauth/bayes.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <string>

namespace ivrauth {

double bayes_update(double prior, double lik_fraud, double lik_legit) {
    const double joint_fraud = lik_fraud * prior;
    const double denom = joint_fraud + lik_legit * (1.0 - prior);
    if (!(denom > 0.0)) throw DataError("impossible evidence");
    return joint_fraud / denom;
}

double total_probability(double prior, double lik_fraud, double lik_legit) {
    return lik_fraud * prior + lik_legit * (1.0 - prior);
}

std::string_view to_string(BeliefMode m) {
    return m == BeliefMode::EmpiricalJoint ? "empirical" : "naive";
}

BeliefMode parse_belief_mode(std::string_view text) {
    if (text == "empirical") return BeliefMode::EmpiricalJoint;
    if (text == "naive") return BeliefMode::NaiveIndependence;
    throw DataError("unknown mode '" + std::string(text) + "' (expected empirical or naive)");
}

InsufficientSupport::InsufficientSupport(std::size_t support)
    : DataError("insufficient support: " + std::to_string(support) + " matching records"),
      support_(support) {}

EvidenceSet EvidenceSet::with(std::size_t i, Observation o) const {
    EvidenceSet e = *this;
    e.asked |= std::uint64_t{1} << i;
    if (o == Observation::Pass) e.passed |= std::uint64_t{1} << i;
    return e;
}

std::size_t EvidenceSet::size() const { return static_cast<std::size_t>(std::popcount(asked)); }

PatternCounts::PatternCounts(const Dataset& d) : schema_(d.schema()) {
    std::map<std::uint64_t, Entry> by_mask;
    const auto& masks = d.pass_masks();
    for (std::size_t r = 0; r < masks.size(); ++r) {
        auto& e = by_mask[masks[r]];
        e.pass_mask = masks[r];
        if (d.records()[r].is_fraud) ++e.fraud;
        else ++e.legit;
    }
    for (auto& [mask, e] : by_mask) entries_.push_back(e);
    n_fraud_ = d.n_fraud();
    n_legit_ = d.n_legit();
}

PatternCounts::PatternCounts(Schema schema, std::vector<Entry> entries) : schema_(std::move(schema)) {
    const std::uint64_t width_mask =
        schema_.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << schema_.size()) - 1;
    std::map<std::uint64_t, Entry> by_mask;
    for (const auto& in : entries) {
        if (in.pass_mask & ~width_mask) throw DataError("pattern mask exceeds schema width");
        auto& e = by_mask[in.pass_mask];
        e.pass_mask = in.pass_mask;
        e.fraud += in.fraud;
        e.legit += in.legit;
    }
    for (auto& [mask, e] : by_mask) {
        n_fraud_ += e.fraud;
        n_legit_ += e.legit;
        entries_.push_back(e);
    }
}

double PatternCounts::prior() const {
    if (n_total() == 0) throw DataError("empty dataset");
    return static_cast<double>(n_fraud_) / static_cast<double>(n_total());
}

Tally PatternCounts::tally(const EvidenceSet& e) const {
    Tally t;
    for (const auto& entry : entries_) {
        if (e.matches(entry.pass_mask)) {
            t.fraud += entry.fraud;
            t.legit += entry.legit;
        }
    }
    return t;
}

ClassConditional PatternCounts::class_conditional(std::size_t credential) const {
    ClassConditional cc;
    cc.support_fraud = n_fraud_;
    cc.support_legit = n_legit_;
    std::size_t pf = 0, pl = 0;
    for (const auto& entry : entries_) {
        if ((entry.pass_mask >> credential) & 1u) {
            pf += entry.fraud;
            pl += entry.legit;
        }
    }
    if (n_fraud_ > 0) cc.p_pass_given_fraud = static_cast<double>(pf) / static_cast<double>(n_fraud_);
    if (n_legit_ > 0) cc.p_pass_given_legit = static_cast<double>(pl) / static_cast<double>(n_legit_);
    return cc;
}

namespace {

double naive_posterior(const PatternCounts& counts, const EvidenceSet& e, double prior) {
    // Ascending schema order, so the result does not depend on the order in
    // which the evidence arrived.
    double belief = prior;
    for (std::size_t i = 0; i < counts.schema().size(); ++i) {
        if (!e.contains(i)) continue;
        const auto cc = counts.class_conditional(i);
        const bool passed = (e.passed >> i) & 1u;
        const double lf = passed ? cc.p_pass_given_fraud : 1.0 - cc.p_pass_given_fraud;
        const double ll = passed ? cc.p_pass_given_legit : 1.0 - cc.p_pass_given_legit;
        belief = bayes_update(belief, lf, ll);
    }
    return belief;
}

}  // namespace

PosteriorResult posterior(const PatternCounts& counts, const EvidenceSet& e, const PosteriorOptions& opts) {
    const double prior = opts.prior_override ? *opts.prior_override : counts.prior();
    if (prior < 0.0 || prior > 1.0) throw DataError("prior must lie in [0, 1]");

    const Tally t = counts.tally(e);
    PosteriorResult r;
    r.support = t.total();

    if (opts.mode == BeliefMode::EmpiricalJoint) {
        if (t.total() >= std::max<std::size_t>(opts.min_support, 1)) {
            r.mode = BeliefMode::EmpiricalJoint;
            if (!opts.prior_override) {
                r.posterior = static_cast<double>(t.fraud) / static_cast<double>(t.total());
            } else {
                const double lf = counts.n_fraud() ? static_cast<double>(t.fraud) / static_cast<double>(counts.n_fraud()) : 0.0;
                const double ll = counts.n_legit() ? static_cast<double>(t.legit) / static_cast<double>(counts.n_legit()) : 0.0;
                r.posterior = bayes_update(prior, lf, ll);
            }
            return r;
        }
        if (!opts.fallback_to_naive) throw InsufficientSupport(t.total());
    }
    r.mode = BeliefMode::NaiveIndependence;
    r.posterior = naive_posterior(counts, e, prior);
    return r;
}

EvidenceSet make_evidence(const Schema& schema, std::span<const EvidenceItem> evidence) {
    EvidenceSet e;
    for (const auto& item : evidence) {
        const std::size_t i = schema.index_of(item.credential.name);
        if (e.contains(i)) throw DataError("duplicate evidence for credential '" + item.credential.name + "'");
        e = e.with(i, item.outcome);
    }
    return e;
}

Belief sequential_posterior(const PatternCounts& counts, std::span<const EvidenceItem> evidence,
                            const PosteriorOptions& opts) {
    if (evidence.empty()) throw DataError("evidence must be non-empty");
    const EvidenceSet e = make_evidence(counts.schema(), evidence);
    const auto r = posterior(counts, e, opts);
    return Belief{r.posterior, {evidence.begin(), evidence.end()}, r.mode, r.support};
}

Belief sequential_posterior(const Dataset& d, std::span<const EvidenceItem> evidence,
                            const PosteriorOptions& opts) {
    return sequential_posterior(PatternCounts(d), evidence, opts);
}

}  // namespace ivrauth
