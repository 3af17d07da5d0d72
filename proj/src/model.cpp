#include "ivrauth/model.hpp"

#include <algorithm>
#include <unordered_set>

namespace ivrauth {

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Pass: return "pass";
        case Outcome::Fail: return "fail";
        case Outcome::Missing: return "missing";
    }
    return "?";
}

std::string_view to_string(Observation o) {
    return o == Observation::Pass ? "pass" : "fail";
}

Observation parse_observation(std::string_view text) {
    if (text == "pass") return Observation::Pass;
    if (text == "fail") return Observation::Fail;
    throw DataError("invalid outcome '" + std::string(text) + "' (expected pass or fail)");
}

Schema::Schema(std::vector<CredentialId> credentials) : credentials_(std::move(credentials)) {
    if (credentials_.size() > kMaxCredentials)
        throw DataError("schema has " + std::to_string(credentials_.size()) +
                        " credentials; at most 64 are supported");
    std::unordered_set<std::string> seen;
    for (const auto& c : credentials_) {
        if (c.name.empty()) throw DataError("credential name must be non-empty");
        if (!seen.insert(c.name).second)
            throw DataError("duplicate credential '" + c.name + "'");
    }
}

Schema::Schema(std::initializer_list<const char*> names)
    : Schema([&] {
          std::vector<CredentialId> ids;
          for (const char* n : names) ids.push_back({n});
          return ids;
      }()) {}

std::optional<std::size_t> Schema::find(std::string_view name) const {
    for (std::size_t i = 0; i < credentials_.size(); ++i)
        if (credentials_[i].name == name) return i;
    return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw DataError("unknown credential '" + std::string(name) + "'");
}

Dataset::Dataset(Schema schema, std::vector<CallRecord> records) : schema_(std::move(schema)) {
    std::vector<std::uint64_t> masks;
    masks.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.outcomes.size() != schema_.size())
            throw DataError("record " + std::to_string(r) + " has " +
                            std::to_string(rec.outcomes.size()) + " outcomes, schema has " +
                            std::to_string(schema_.size()));
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < rec.outcomes.size(); ++i)
            if (rec.outcomes[i] == Outcome::Pass) m |= std::uint64_t{1} << i;
        masks.push_back(m);
        if (rec.is_fraud) ++n_fraud_;
    }
    records_ = std::make_shared<const std::vector<CallRecord>>(std::move(records));
    pass_masks_ = std::make_shared<const std::vector<std::uint64_t>>(std::move(masks));
}

double prior_fraud(const Dataset& d) {
    if (d.n_total() == 0) throw DataError("empty dataset");
    return static_cast<double>(d.n_fraud()) / static_cast<double>(d.n_total());
}

ClassConditional class_conditional(const Dataset& d, std::size_t credential) {
    ClassConditional cc;
    std::size_t pass_fraud = 0, pass_legit = 0;
    for (const auto& rec : d.records()) {
        const bool passed = rec.outcomes[credential] == Outcome::Pass;
        if (rec.is_fraud) {
            ++cc.support_fraud;
            pass_fraud += passed;
        } else {
            ++cc.support_legit;
            pass_legit += passed;
        }
    }
    if (cc.support_fraud > 0)
        cc.p_pass_given_fraud = static_cast<double>(pass_fraud) / static_cast<double>(cc.support_fraud);
    if (cc.support_legit > 0)
        cc.p_pass_given_legit = static_cast<double>(pass_legit) / static_cast<double>(cc.support_legit);
    return cc;
}

}  // namespace ivrauth
