#include "ivrauth/pairs.hpp"

#include <algorithm>
#include <tuple>

namespace ivrauth {

PairReport evaluate_pair(const Dataset& d, std::size_t c1, std::size_t c2) {
    if (c1 == c2) throw DataError("degenerate pair");
    if (c1 >= d.schema().size() || c2 >= d.schema().size()) throw DataError("credential out of range");
    if (d.n_total() == 0) throw DataError("empty dataset");

    PairReport r;
    r.first = d.schema()[c1];
    r.second = d.schema()[c2];
    const std::uint64_t both = (std::uint64_t{1} << c1) | (std::uint64_t{1} << c2);
    const auto& masks = d.pass_masks();
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const bool pass = (masks[i] & both) == both;
        if (d.records()[i].is_fraud) (pass ? r.fraud_passed : r.fraud_blocked)++;
        else (pass ? r.legit_passed : r.legit_blocked)++;
    }

    const std::size_t passed = r.fraud_passed + r.legit_passed;
    if (passed > 0)
        r.fraud_rate_given_both_pass = static_cast<double>(r.fraud_passed) / static_cast<double>(passed);
    if (d.n_fraud() > 0) r.tpr = static_cast<double>(r.fraud_blocked) / static_cast<double>(d.n_fraud());
    if (d.n_legit() > 0) r.fpr = static_cast<double>(r.legit_blocked) / static_cast<double>(d.n_legit());
    r.pass_both_rate = static_cast<double>(passed) / static_cast<double>(d.n_total());
    r.youden_j = r.tpr - r.fpr;
    return r;
}

PairReport evaluate_pair(const Dataset& d, std::string_view c1, std::string_view c2) {
    return evaluate_pair(d, d.schema().index_of(c1), d.schema().index_of(c2));
}

PairObjective parse_pair_objective(std::string_view text, double fpr_cap) {
    if (text == "min-posterior") return PairObjective::min_posterior();
    if (text == "max-youden") return PairObjective::max_youden();
    if (text == "max-tpr") return PairObjective::max_tpr_under_fpr_cap(fpr_cap);
    throw DataError("unknown objective '" + std::string(text) + "'");
}

std::vector<PairReport> rank_pairs(const Dataset& d, const PairObjective& objective) {
    const std::size_t n = d.schema().size();
    std::vector<PairReport> reports;
    reports.reserve(n * (n > 0 ? n - 1 : 0) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) reports.push_back(evaluate_pair(d, i, j));

    if (objective.kind == PairObjective::Kind::MaxTprUnderFprCap) {
        std::erase_if(reports, [&](const PairReport& r) { return r.fpr > objective.fpr_cap; });
    }

    const auto tie_break = [](const PairReport& a, const PairReport& b) {
        return std::forward_as_tuple(a.fpr, a.first.name, a.second.name) <
               std::forward_as_tuple(b.fpr, b.first.name, b.second.name);
    };

    std::stable_sort(reports.begin(), reports.end(), [&](const PairReport& a, const PairReport& b) {
        switch (objective.kind) {
            case PairObjective::Kind::MinPosterior: {
                const auto& fa = a.fraud_rate_given_both_pass;
                const auto& fb = b.fraud_rate_given_both_pass;
                if (fa.has_value() != fb.has_value()) return fa.has_value();
                if (fa && *fa != *fb) return *fa < *fb;
                break;
            }
            case PairObjective::Kind::MaxYouden:
                if (a.youden_j != b.youden_j) return a.youden_j > b.youden_j;
                break;
            case PairObjective::Kind::MaxTprUnderFprCap:
                if (a.tpr != b.tpr) return a.tpr > b.tpr;
                break;
        }
        return tie_break(a, b);
    });
    return reports;
}

}  // namespace ivrauth
