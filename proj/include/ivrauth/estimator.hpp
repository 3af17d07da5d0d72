#pragma once
// Empirical per-credential statistics, missingness, and pairwise correlation.
// Everything here is a raw count ratio; 0/0 is reported as std::nullopt.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "ivrauth/model.hpp"

namespace ivrauth {

struct CredentialStats {
    CredentialId credential;
    std::size_t pass_count = 0;
    std::size_t fraud_pass_count = 0;
    std::size_t missing_count = 0;
    double pass_rate_overall = 0.0;   // pass / all records
    double fail_or_null_rate = 0.0;   // 1 - pass_rate_overall
    std::optional<double> fraud_rate_given_pass;  // undefined when nobody passed
    ClassConditional class_conditional;
};

// One entry per schema credential, in schema order.
std::vector<CredentialStats> credential_stats(const Dataset& d);

std::vector<std::size_t> missingness_profile(const Dataset& d);

enum class NullPolicy { PairwiseDelete, NullAsFail };

std::string_view to_string(NullPolicy p);
NullPolicy parse_null_policy(std::string_view text);  // "pairwise-delete" | "null-as-fail"

struct CorrelationMatrix {
    std::size_t n = 0;
    NullPolicy policy = NullPolicy::PairwiseDelete;
    std::vector<std::optional<double>> values;  // row-major n*n
    std::vector<std::size_t> support;           // records used per cell

    const std::optional<double>& at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    std::size_t support_at(std::size_t i, std::size_t j) const { return support[i * n + j]; }
};

// Pearson correlation of 0/1 pass indicators. A cell is undefined when
// either column has zero variance over the records it uses.
CorrelationMatrix correlation_matrix(const Dataset& d, NullPolicy policy = NullPolicy::PairwiseDelete);

}  // namespace ivrauth
