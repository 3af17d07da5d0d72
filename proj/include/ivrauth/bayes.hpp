#pragma once
// Posterior fraud probability: single-step Bayes update, the total
// probability denominator, and sequential updating over several credential
// outcomes.
//
// Two update modes:
//   EmpiricalJoint     count fraud among records matching every observation
//   NaiveIndependence  fold single-credential Bayes updates, treating
//                      outcomes as independent given the class
//
// A Fail observation matches Fail and Missing records, and uses
// 1 - P(pass | class) in the naive fold.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ivrauth/model.hpp"

namespace ivrauth {

// Throws DataError("impossible evidence") when both weighted likelihoods are 0.
double bayes_update(double prior, double lik_fraud, double lik_legit);

double total_probability(double prior, double lik_fraud, double lik_legit);

enum class BeliefMode { EmpiricalJoint, NaiveIndependence };

std::string_view to_string(BeliefMode m);
BeliefMode parse_belief_mode(std::string_view text);  // "empirical" | "naive"

class InsufficientSupport : public DataError {
public:
    explicit InsufficientSupport(std::size_t support);
    std::size_t support() const { return support_; }

private:
    std::size_t support_;
};

// Observed outcomes as two bitmasks over schema positions.
struct EvidenceSet {
    std::uint64_t asked = 0;
    std::uint64_t passed = 0;  // subset of asked

    bool contains(std::size_t i) const { return (asked >> i) & 1u; }
    EvidenceSet with(std::size_t i, Observation o) const;
    bool matches(std::uint64_t pass_mask) const { return (pass_mask & asked) == passed; }
    std::size_t size() const;

    friend bool operator==(const EvidenceSet&, const EvidenceSet&) = default;
};

struct Tally {
    std::size_t fraud = 0;
    std::size_t legit = 0;
    std::size_t total() const { return fraud + legit; }
};

// Per-pass-pattern class counts. Exactly as informative as the Dataset for
// every quantity in this engine, and small enough to embed in a policy.
class PatternCounts {
public:
    struct Entry {
        std::uint64_t pass_mask = 0;
        std::size_t fraud = 0;
        std::size_t legit = 0;
    };

    PatternCounts() = default;
    explicit PatternCounts(const Dataset& d);
    // Entries are merged by mask and sorted; masks must fit the schema.
    PatternCounts(Schema schema, std::vector<Entry> entries);

    const Schema& schema() const { return schema_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t n_fraud() const { return n_fraud_; }
    std::size_t n_legit() const { return n_legit_; }
    std::size_t n_total() const { return n_fraud_ + n_legit_; }

    double prior() const;  // throws on empty
    Tally tally(const EvidenceSet& e) const;
    ClassConditional class_conditional(std::size_t credential) const;

private:
    Schema schema_;
    std::vector<Entry> entries_;
    std::size_t n_fraud_ = 0;
    std::size_t n_legit_ = 0;
};

struct PosteriorOptions {
    BeliefMode mode = BeliefMode::EmpiricalJoint;
    std::size_t min_support = 30;
    // Retry in NaiveIndependence when EmpiricalJoint support is too small.
    bool fallback_to_naive = false;
    // Replaces the dataset prior. EmpiricalJoint then applies the empirical
    // class likelihoods of the evidence to this prior.
    std::optional<double> prior_override;
};

struct PosteriorResult {
    double posterior = 0.0;
    BeliefMode mode = BeliefMode::EmpiricalJoint;  // mode actually used
    std::size_t support = 0;                       // records matching the evidence
};

// Empty evidence yields the prior. Throws InsufficientSupport when
// EmpiricalJoint support < max(min_support, 1) and fallback is off.
PosteriorResult posterior(const PatternCounts& counts, const EvidenceSet& e,
                          const PosteriorOptions& opts);

struct EvidenceItem {
    CredentialId credential;
    Observation outcome = Observation::Pass;

    friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

struct Belief {
    double posterior_fraud = 0.0;
    std::vector<EvidenceItem> evidence_trail;
    BeliefMode mode = BeliefMode::EmpiricalJoint;
    std::size_t support = 0;
};

// Throws DataError on empty evidence, duplicate or unknown credentials.
EvidenceSet make_evidence(const Schema& schema, std::span<const EvidenceItem> evidence);

Belief sequential_posterior(const Dataset& d, std::span<const EvidenceItem> evidence,
                            const PosteriorOptions& opts = {});
Belief sequential_posterior(const PatternCounts& counts, std::span<const EvidenceItem> evidence,
                            const PosteriorOptions& opts = {});

}  // namespace ivrauth
