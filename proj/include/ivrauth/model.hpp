#pragma once
// Domain types shared by every ivrauth module.
//
// A Dataset is an immutable table of calls: one tri-state outcome per
// credential slot plus the fraud label. Credentials are opaque named slots;
// their order within the Schema is the legacy static prompting order.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ivrauth {

// Bad input data (malformed files, invalid specs, impossible evidence).
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Outcome : std::uint8_t { Pass, Fail, Missing };

std::string_view to_string(Outcome o);

// Evidence only distinguishes pass from not-pass; Fail evidence matches
// both Fail and Missing records.
enum class Observation : std::uint8_t { Pass, Fail };

std::string_view to_string(Observation o);
Observation parse_observation(std::string_view text);  // "pass" | "fail"

inline bool matches(Outcome recorded, Observation observed) {
    return observed == Observation::Pass ? recorded == Outcome::Pass
                                         : recorded != Outcome::Pass;
}

struct CredentialId {
    std::string name;

    friend bool operator==(const CredentialId&, const CredentialId&) = default;
    friend auto operator<=>(const CredentialId&, const CredentialId&) = default;
};

// Ordered, duplicate-free credential list. Bitmask-based counting caps the
// width at 64 slots.
class Schema {
public:
    static constexpr std::size_t kMaxCredentials = 64;

    Schema() = default;
    explicit Schema(std::vector<CredentialId> credentials);
    Schema(std::initializer_list<const char*> names);

    std::size_t size() const { return credentials_.size(); }
    bool empty() const { return credentials_.empty(); }
    const CredentialId& operator[](std::size_t i) const { return credentials_[i]; }
    const std::vector<CredentialId>& credentials() const { return credentials_; }

    std::optional<std::size_t> find(std::string_view name) const;
    // Throws DataError naming the unknown credential.
    std::size_t index_of(std::string_view name) const;

    friend bool operator==(const Schema&, const Schema&) = default;

private:
    std::vector<CredentialId> credentials_;
};

// outcomes[i] belongs to schema credential i; Missing is stored explicitly.
struct CallRecord {
    std::vector<Outcome> outcomes;
    bool is_fraud = false;

    friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

struct ClassConditional {
    double p_pass_given_fraud = 0.0;
    double p_pass_given_legit = 0.0;
    std::size_t support_fraud = 0;
    std::size_t support_legit = 0;
};

class Dataset {
public:
    Dataset() = default;
    // Throws DataError if any record's width differs from the schema.
    Dataset(Schema schema, std::vector<CallRecord> records);

    const Schema& schema() const { return schema_; }
    const std::vector<CallRecord>& records() const { return *records_; }
    std::size_t n_total() const { return records_->size(); }
    std::size_t n_fraud() const { return n_fraud_; }
    std::size_t n_legit() const { return n_total() - n_fraud_; }

    // Bit i set iff the record passed schema credential i.
    const std::vector<std::uint64_t>& pass_masks() const { return *pass_masks_; }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.schema_ == b.schema_ && a.records() == b.records();
    }

private:
    Schema schema_;
    std::shared_ptr<const std::vector<CallRecord>> records_ =
        std::make_shared<const std::vector<CallRecord>>();
    std::shared_ptr<const std::vector<std::uint64_t>> pass_masks_ =
        std::make_shared<const std::vector<std::uint64_t>>();
    std::size_t n_fraud_ = 0;
};

// Throws DataError("empty dataset") when there are no records.
double prior_fraud(const Dataset& d);

// Class-conditional pass rates for one credential. Missing and Fail both
// count as not passing. A class with zero support reports probability 0.
ClassConditional class_conditional(const Dataset& d, std::size_t credential);

}  // namespace ivrauth
