#pragma once
// Brute-force reference computations for tests. These walk CallRecords
// directly with textbook formulas and never touch the library's pass masks,
// pattern tables, or sorting code.

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ivrauth/model.hpp"

namespace oracle {

using ivrauth::CallRecord;
using ivrauth::Outcome;

struct Ev {
    std::size_t credential;
    bool pass;
};

inline bool holds(const CallRecord& r, const Ev& e) {
    const bool passed = r.outcomes[e.credential] == Outcome::Pass;
    return e.pass ? passed : !passed;
}

inline bool holds_all(const CallRecord& r, const std::vector<Ev>& evidence) {
    for (const auto& e : evidence)
        if (!holds(r, e)) return false;
    return true;
}

struct Count {
    std::size_t fraud = 0;
    std::size_t legit = 0;
};

inline Count count(const std::vector<CallRecord>& records, const std::vector<Ev>& evidence) {
    Count c;
    for (const auto& r : records) {
        if (!holds_all(r, evidence)) continue;
        if (r.is_fraud) ++c.fraud;
        else ++c.legit;
    }
    return c;
}

// #(fraud and evidence) / #(evidence); nullopt when nothing matches.
inline std::optional<double> joint_posterior(const std::vector<CallRecord>& records, const std::vector<Ev>& evidence) {
    const Count c = count(records, evidence);
    if (c.fraud + c.legit == 0) return std::nullopt;
    return static_cast<double>(c.fraud) / static_cast<double>(c.fraud + c.legit);
}

struct PairMetrics {
    std::optional<double> fraud_rate;
    double tpr = 0, fpr = 0, pass_both = 0, youden = 0;
    std::size_t fraud_pass = 0, fraud_block = 0, legit_pass = 0, legit_block = 0;
};

inline PairMetrics pair_metrics(const std::vector<CallRecord>& records, std::size_t a, std::size_t b) {
    PairMetrics m;
    std::size_t n_fraud = 0, n_legit = 0;
    for (const auto& r : records) {
        const bool ok = r.outcomes[a] == Outcome::Pass && r.outcomes[b] == Outcome::Pass;
        if (r.is_fraud) {
            ++n_fraud;
            ok ? ++m.fraud_pass : ++m.fraud_block;
        } else {
            ++n_legit;
            ok ? ++m.legit_pass : ++m.legit_block;
        }
    }
    if (m.fraud_pass + m.legit_pass > 0)
        m.fraud_rate = static_cast<double>(m.fraud_pass) / static_cast<double>(m.fraud_pass + m.legit_pass);
    if (n_fraud) m.tpr = static_cast<double>(m.fraud_block) / static_cast<double>(n_fraud);
    if (n_legit) m.fpr = static_cast<double>(m.legit_block) / static_cast<double>(n_legit);
    m.pass_both = static_cast<double>(m.fraud_pass + m.legit_pass) / static_cast<double>(records.size());
    m.youden = m.tpr - m.fpr;
    return m;
}

// Greedy choice by exhaustive evaluation: among unasked candidates whose
// evidence+pass support reaches max(min_support, 1), minimize
// (posterior-if-pass, legit failure rate, name).
inline std::optional<std::size_t> next_credential(const std::vector<CallRecord>& records,
                                                  const std::vector<std::string>& names,
                                                  const std::vector<Ev>& evidence, std::size_t min_support) {
    std::optional<std::size_t> best;
    double best_post = 0, best_fail = 0;
    for (std::size_t c = 0; c < names.size(); ++c) {
        bool asked = false;
        for (const auto& e : evidence) asked |= e.credential == c;
        if (asked) continue;

        auto with_pass = evidence;
        with_pass.push_back({c, true});
        const Count cp = count(records, with_pass);
        if (cp.fraud + cp.legit < std::max<std::size_t>(min_support, 1)) continue;
        const double post = static_cast<double>(cp.fraud) / static_cast<double>(cp.fraud + cp.legit);

        const Count here = count(records, evidence);
        const double fail = here.legit == 0 ? 0.0
                                            : static_cast<double>(here.legit - cp.legit) / static_cast<double>(here.legit);

        const bool better = !best || post < best_post || (post == best_post && fail < best_fail) ||
                            (post == best_post && fail == best_fail && names[c] < names[*best]);
        if (better) {
            best = c;
            best_post = post;
            best_fail = fail;
        }
    }
    return best;
}

// Textbook Pearson r over two real-valued columns.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

// Random tri-state dataset for property tests.
inline ivrauth::Dataset random_dataset(std::mt19937_64& rng, std::size_t n_credentials, std::size_t n_records) {
    std::vector<ivrauth::CredentialId> ids;
    for (std::size_t i = 0; i < n_credentials; ++i) ids.push_back({std::string(1, static_cast<char>('A' + i))});
    std::uniform_int_distribution<int> tri(0, 2);
    std::bernoulli_distribution fraud(0.35);
    std::vector<CallRecord> records;
    for (std::size_t r = 0; r < n_records; ++r) {
        CallRecord rec;
        for (std::size_t c = 0; c < n_credentials; ++c) rec.outcomes.push_back(static_cast<Outcome>(tri(rng)));
        rec.is_fraud = fraud(rng);
        records.push_back(std::move(rec));
    }
    return ivrauth::Dataset(ivrauth::Schema(std::move(ids)), std::move(records));
}

// Build a dataset from rows like "PFM1": one letter per credential
// (P pass, F fail, M missing) followed by the fraud label digit.
inline ivrauth::Dataset from_rows(ivrauth::Schema schema, const std::vector<std::string>& rows) {
    std::vector<CallRecord> records;
    for (const auto& row : rows) {
        CallRecord rec;
        for (std::size_t i = 0; i + 1 < row.size(); ++i)
            rec.outcomes.push_back(row[i] == 'P' ? Outcome::Pass : row[i] == 'F' ? Outcome::Fail : Outcome::Missing);
        rec.is_fraud = row.back() == '1';
        records.push_back(std::move(rec));
    }
    return ivrauth::Dataset(std::move(schema), std::move(records));
}

}  // namespace oracle
