#include "ivrauth/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ivrauth {

std::vector<CredentialStats> credential_stats(const Dataset& d) {
    if (d.n_total() == 0) throw DataError("empty dataset");
    const auto n = static_cast<double>(d.n_total());

    std::vector<CredentialStats> out;
    out.reserve(d.schema().size());
    for (std::size_t c = 0; c < d.schema().size(); ++c) {
        CredentialStats s;
        s.credential = d.schema()[c];
        for (const auto& rec : d.records()) {
            switch (rec.outcomes[c]) {
                case Outcome::Pass:
                    ++s.pass_count;
                    s.fraud_pass_count += rec.is_fraud;
                    break;
                case Outcome::Missing: ++s.missing_count; break;
                case Outcome::Fail: break;
            }
        }
        s.pass_rate_overall = static_cast<double>(s.pass_count) / n;
        s.fail_or_null_rate = static_cast<double>(d.n_total() - s.pass_count) / n;
        if (s.pass_count > 0)
            s.fraud_rate_given_pass =
                static_cast<double>(s.fraud_pass_count) / static_cast<double>(s.pass_count);
        s.class_conditional = class_conditional(d, c);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::size_t> missingness_profile(const Dataset& d) {
    std::vector<std::size_t> counts(d.schema().size(), 0);
    for (const auto& rec : d.records())
        for (std::size_t c = 0; c < counts.size(); ++c)
            counts[c] += rec.outcomes[c] == Outcome::Missing;
    return counts;
}

std::string_view to_string(NullPolicy p) {
    return p == NullPolicy::PairwiseDelete ? "pairwise-delete" : "null-as-fail";
}

NullPolicy parse_null_policy(std::string_view text) {
    if (text == "pairwise-delete") return NullPolicy::PairwiseDelete;
    if (text == "null-as-fail") return NullPolicy::NullAsFail;
    throw DataError("unknown null policy '" + std::string(text) + "'");
}

namespace {

// Pearson r from integer co-occurrence counts of two 0/1 columns.
std::optional<double> phi_from_counts(std::size_t n, std::size_t sx, std::size_t sy, std::size_t sxy) {
    if (n < 2) return std::nullopt;
    const double dn = static_cast<double>(n);
    const double cov = dn * static_cast<double>(sxy) - static_cast<double>(sx) * static_cast<double>(sy);
    const double vx = static_cast<double>(sx) * (dn - static_cast<double>(sx));
    const double vy = static_cast<double>(sy) * (dn - static_cast<double>(sy));
    if (vx <= 0.0 || vy <= 0.0) return std::nullopt;
    return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
}

}  // namespace

CorrelationMatrix correlation_matrix(const Dataset& d, NullPolicy policy) {
    const std::size_t k = d.schema().size();
    CorrelationMatrix m;
    m.n = k;
    m.policy = policy;
    m.values.assign(k * k, std::nullopt);
    m.support.assign(k * k, 0);

    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            std::size_t n = 0, sx = 0, sy = 0, sxy = 0;
            for (const auto& rec : d.records()) {
                const Outcome a = rec.outcomes[i];
                const Outcome b = rec.outcomes[j];
                if (policy == NullPolicy::PairwiseDelete &&
                    (a == Outcome::Missing || b == Outcome::Missing))
                    continue;
                const bool x = a == Outcome::Pass;
                const bool y = b == Outcome::Pass;
                ++n;
                sx += x;
                sy += y;
                sxy += x && y;
            }
            auto r = phi_from_counts(n, sx, sy, sxy);
            if (i == j && r) r = 1.0;
            m.values[i * k + j] = r;
            m.values[j * k + i] = r;
            m.support[i * k + j] = n;
            m.support[j * k + i] = n;
        }
    }
    return m;
}

}  // namespace ivrauth
