#pragma once
// Canonical JSON form of a compiled Policy.
//
// Objects have sorted keys, the document is written compactly on a single
// line, and doubles use the shortest representation that round-trips. The
// same policy therefore always serializes to the same bytes. The
// "fingerprint" member is the SHA-256 of the document serialized without it.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ivrauth/sequencer.hpp"

namespace ivrauth {

inline constexpr const char* kPolicyFormat = "ivrauth-policy/1";

nlohmann::json policy_to_json(const Policy& p);
std::string serialize_policy(const Policy& p);
std::string policy_fingerprint(const Policy& p);

// Throws DataError on malformed documents, fingerprint mismatch, or any
// structural problem reported by validate_policy.
Policy policy_from_json(const nlohmann::json& doc);
Policy parse_policy(const std::string& text);
Policy load_policy(const std::filesystem::path& path);
void save_policy(const Policy& p, const std::filesystem::path& path);

// Tree shape and threshold consistency. Empty result means valid.
std::vector<std::string> validate_policy(const Policy& p);

}  // namespace ivrauth
