#pragma once
// Two-factor static gates: a call goes forward only if it passes both
// credentials of the pair. Fail or Missing on either blocks it.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ivrauth/model.hpp"

namespace ivrauth {

struct PairReport {
    CredentialId first;
    CredentialId second;
    std::optional<double> fraud_rate_given_both_pass;
    double tpr = 0.0;             // fraud block rate
    double fpr = 0.0;             // legit block rate
    double pass_both_rate = 0.0;
    double youden_j = 0.0;        // tpr - fpr

    std::size_t fraud_passed = 0;
    std::size_t fraud_blocked = 0;
    std::size_t legit_passed = 0;
    std::size_t legit_blocked = 0;

    std::string name() const { return first.name + "+" + second.name; }
};

// Throws DataError("degenerate pair") for c1 == c2.
PairReport evaluate_pair(const Dataset& d, std::size_t c1, std::size_t c2);
PairReport evaluate_pair(const Dataset& d, std::string_view c1, std::string_view c2);

struct PairObjective {
    enum class Kind { MinPosterior, MaxYouden, MaxTprUnderFprCap };
    Kind kind = Kind::MinPosterior;
    double fpr_cap = 1.0;  // MaxTprUnderFprCap only

    static PairObjective min_posterior() { return {Kind::MinPosterior, 1.0}; }
    static PairObjective max_youden() { return {Kind::MaxYouden, 1.0}; }
    static PairObjective max_tpr_under_fpr_cap(double cap) { return {Kind::MaxTprUnderFprCap, cap}; }
};

PairObjective parse_pair_objective(std::string_view text, double fpr_cap);

// All n(n-1)/2 pairs (first before second in schema order), sorted by the
// objective. Ties go to the lower fpr, then to the lexicographically smaller
// pair name. MaxTprUnderFprCap drops pairs with fpr above the cap.
std::vector<PairReport> rank_pairs(const Dataset& d, const PairObjective& objective);

}  // namespace ivrauth
