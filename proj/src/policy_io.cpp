#include "ivrauth/policy_io.hpp"

#include <fstream>
#include <sstream>

#include "sha256.hpp"

namespace ivrauth {

using nlohmann::json;

namespace {

std::string pattern_string(std::uint64_t mask, std::size_t width) {
    std::string s(width, '0');
    for (std::size_t i = 0; i < width; ++i)
        if ((mask >> i) & 1u) s[i] = '1';
    return s;
}

std::uint64_t parse_pattern(const std::string& s, std::size_t width) {
    if (s.size() != width) throw DataError("pattern '" + s + "' does not match schema width");
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < width; ++i) {
        if (s[i] == '1') mask |= std::uint64_t{1} << i;
        else if (s[i] != '0') throw DataError("invalid pattern '" + s + "'");
    }
    return mask;
}

json optional_index(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

json body_to_json(const Policy& p) {
    const auto& schema = p.schema();
    json doc;
    doc["format"] = kPolicyFormat;

    json names = json::array();
    for (const auto& c : schema.credentials()) names.push_back(c.name);
    doc["schema"] = names;

    json counts = json::array();
    for (const auto& e : p.counts.entries())
        counts.push_back({{"pattern", pattern_string(e.pass_mask, schema.size())}, {"fraud", e.fraud}, {"legit", e.legit}});
    doc["counts"] = counts;
    doc["n_total"] = p.counts.n_total();
    doc["n_fraud"] = p.counts.n_fraud();
    doc["prior"] = p.counts.prior();
    doc["dataset_fingerprint"] = p.dataset_fingerprint;

    const auto& o = p.options;
    doc["options"] = {
        {"accept_below", o.thresholds.accept_below},
        {"block_above", o.thresholds.block_above},
        {"max_steps", o.thresholds.max_steps},
        {"fpr_step_cap", o.thresholds.fpr_step_cap ? json(*o.thresholds.fpr_step_cap) : json(nullptr)},
        {"mode", to_string(o.mode)},
        {"min_support", o.min_support},
        {"criterion", to_string(o.criterion)},
        {"on_exhaust", to_string(o.on_exhaust)},
    };

    json nodes = json::array();
    for (const auto& n : p.nodes) {
        json trail = json::array();
        for (const auto& item : n.trail) trail.push_back({item.credential.name, to_string(item.outcome)});
        const auto& d = n.decision;
        nodes.push_back({
            {"id", n.id},
            {"trail", trail},
            {"belief", d.belief},
            {"mode", to_string(d.mode)},
            {"support", d.support},
            {"action", to_string(d.action)},
            {"ask", d.ask ? json(schema[*d.ask].name) : json(nullptr)},
            {"reason", to_string(d.reason)},
            {"selection_fallback", d.selection_fallback},
            {"escalate", d.escalate},
            {"pass", optional_index(n.on_pass)},
            {"fail", optional_index(n.on_fail)},
        });
    }
    doc["nodes"] = nodes;
    return doc;
}

Action parse_action(const std::string& s) {
    if (s == "ask") return Action::Ask;
    if (s == "accept") return Action::Accept;
    if (s == "block") return Action::Block;
    throw DataError("unknown action '" + s + "'");
}

NodeReason parse_reason(const std::string& s) {
    for (auto r : {NodeReason::None, NodeReason::AcceptThreshold, NodeReason::BlockThreshold,
                   NodeReason::Exhausted, NodeReason::MaxSteps, NodeReason::ImpossibleEvidence})
        if (to_string(r) == s) return r;
    throw DataError("unknown node reason '" + s + "'");
}

std::optional<std::size_t> index_or_null(const json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<std::size_t>();
}

}  // namespace

json policy_to_json(const Policy& p) {
    json doc = body_to_json(p);
    doc["fingerprint"] = detail::sha256_hex(doc.dump());
    return doc;
}

std::string serialize_policy(const Policy& p) { return policy_to_json(p).dump() + "\n"; }

std::string policy_fingerprint(const Policy& p) { return detail::sha256_hex(body_to_json(p).dump()); }

Policy policy_from_json(const json& doc_in) {
    Policy p;
    try {
        json doc = doc_in;
        if (doc.at("format").get<std::string>() != kPolicyFormat)
            throw DataError("unsupported policy format '" + doc.at("format").get<std::string>() + "'");

        const std::string claimed = doc.at("fingerprint").get<std::string>();
        doc.erase("fingerprint");

        std::vector<CredentialId> ids;
        for (const auto& n : doc.at("schema")) ids.push_back({n.get<std::string>()});
        Schema schema(std::move(ids));

        std::vector<PatternCounts::Entry> entries;
        for (const auto& e : doc.at("counts"))
            entries.push_back({parse_pattern(e.at("pattern").get<std::string>(), schema.size()),
                               e.at("fraud").get<std::size_t>(), e.at("legit").get<std::size_t>()});
        p.counts = PatternCounts(schema, std::move(entries));
        if (p.counts.n_total() != doc.at("n_total").get<std::size_t>() ||
            p.counts.n_fraud() != doc.at("n_fraud").get<std::size_t>())
            throw DataError("pattern counts disagree with n_total/n_fraud");
        p.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();

        const auto& o = doc.at("options");
        p.options.thresholds.accept_below = o.at("accept_below").get<double>();
        p.options.thresholds.block_above = o.at("block_above").get<double>();
        p.options.thresholds.max_steps = o.at("max_steps").get<std::size_t>();
        if (!o.at("fpr_step_cap").is_null()) p.options.thresholds.fpr_step_cap = o.at("fpr_step_cap").get<double>();
        p.options.mode = parse_belief_mode(o.at("mode").get<std::string>());
        p.options.min_support = o.at("min_support").get<std::size_t>();
        p.options.criterion = parse_criterion(o.at("criterion").get<std::string>());
        p.options.on_exhaust = parse_exhaust_action(o.at("on_exhaust").get<std::string>());
        p.options.thresholds.validate();

        for (const auto& jn : doc.at("nodes")) {
            PolicyNode n;
            n.id = jn.at("id").get<std::size_t>();
            for (const auto& t : jn.at("trail")) {
                const auto name = t.at(0).get<std::string>();
                schema.index_of(name);
                n.trail.push_back({CredentialId{name}, parse_observation(t.at(1).get<std::string>())});
            }
            auto& d = n.decision;
            d.belief = jn.at("belief").get<double>();
            d.mode = parse_belief_mode(jn.at("mode").get<std::string>());
            d.support = jn.at("support").get<std::size_t>();
            d.action = parse_action(jn.at("action").get<std::string>());
            if (!jn.at("ask").is_null()) d.ask = schema.index_of(jn.at("ask").get<std::string>());
            d.reason = parse_reason(jn.at("reason").get<std::string>());
            d.selection_fallback = jn.at("selection_fallback").get<bool>();
            d.escalate = jn.at("escalate").get<bool>();
            n.on_pass = index_or_null(jn.at("pass"));
            n.on_fail = index_or_null(jn.at("fail"));
            p.nodes.push_back(std::move(n));
        }

        if (claimed != detail::sha256_hex(doc.dump()))
            throw DataError("policy fingerprint mismatch");
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed policy: ") + e.what());
    }

    const auto problems = validate_policy(p);
    if (!problems.empty()) throw DataError("invalid policy: " + problems.front());
    return p;
}

Policy parse_policy(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed policy: ") + e.what());
    }
    return policy_from_json(doc);
}

Policy load_policy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_policy(buf.str());
}

void save_policy(const Policy& p, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << serialize_policy(p);
    if (!out) throw DataError("write failed for " + path.string());
}

std::vector<std::string> validate_policy(const Policy& p) {
    std::vector<std::string> problems;
    const auto fail = [&](std::size_t id, const std::string& what) {
        problems.push_back("node " + std::to_string(id) + ": " + what);
    };
    if (p.nodes.empty()) {
        problems.push_back("policy has no nodes");
        return problems;
    }
    if (!p.nodes.front().trail.empty()) problems.push_back("root trail must be empty");

    const auto& t = p.options.thresholds;
    std::vector<std::size_t> parents(p.nodes.size(), 0);
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        const auto& n = p.nodes[i];
        const auto& d = n.decision;
        if (n.id != i) fail(i, "id out of sequence");
        if (!(d.belief >= 0.0 && d.belief <= 1.0)) fail(i, "belief outside [0, 1]");
        if (n.depth() > t.max_steps) fail(i, "deeper than max_steps");

        if (d.action == Action::Ask) {
            if (!d.ask || !n.on_pass || !n.on_fail) {
                fail(i, "ask node without credential or children");
                continue;
            }
            if (!(d.belief >= t.accept_below && d.belief <= t.block_above)) fail(i, "ask node belief outside continue band");
            for (const auto& item : n.trail)
                if (item.credential == p.schema()[*d.ask]) fail(i, "credential asked twice on a path");
            for (auto [child, obs] : {std::pair{*n.on_pass, Observation::Pass}, std::pair{*n.on_fail, Observation::Fail}}) {
                if (child <= i || child >= p.nodes.size()) {
                    fail(i, "child index out of range");
                    continue;
                }
                ++parents[child];
                auto expected = n.trail;
                expected.push_back({p.schema()[*d.ask], obs});
                if (p.nodes[child].trail != expected) fail(child, "trail does not extend its parent");
            }
        } else {
            if (n.on_pass || n.on_fail || d.ask) fail(i, "terminal node with children");
            if (d.action == Action::Accept && !(d.belief < t.accept_below)) fail(i, "accept above accept_below");
            if (d.reason == NodeReason::BlockThreshold && !(d.belief > t.block_above)) fail(i, "threshold block below block_above");
        }
    }
    for (std::size_t i = 1; i < p.nodes.size(); ++i)
        if (parents[i] != 1) fail(i, "must have exactly one parent");
    return problems;
}

}  // namespace ivrauth
