#include "ivrauth/report.hpp"

namespace ivrauth {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json pair_json(const PairReport& r) {
    return {{"pair", r.name()},
            {"first", r.first.name},
            {"second", r.second.name},
            {"fraud_rate_given_both_pass", opt(r.fraud_rate_given_both_pass)},
            {"tpr", r.tpr},
            {"fpr", r.fpr},
            {"pass_both_rate", r.pass_both_rate},
            {"youden_j", r.youden_j},
            {"counts",
             {{"fraud_passed", r.fraud_passed},
              {"fraud_blocked", r.fraud_blocked},
              {"legit_passed", r.legit_passed},
              {"legit_blocked", r.legit_blocked}}}};
}

}  // namespace

std::string format_double(double v) { return json(v).dump(); }

json stats_report(const Dataset& d, NullPolicy policy) {
    json creds = json::array();
    const auto stats = credential_stats(d);
    for (const auto& s : stats) {
        creds.push_back({{"credential", s.credential.name},
                         {"pass", s.pass_rate_overall},
                         {"fail_or_null", s.fail_or_null_rate},
                         {"fraud_rate_given_pass", opt(s.fraud_rate_given_pass)},
                         {"pass_count", s.pass_count},
                         {"fraud_pass_count", s.fraud_pass_count},
                         {"missing_count", s.missing_count},
                         {"p_pass_given_fraud", s.class_conditional.p_pass_given_fraud},
                         {"p_pass_given_legit", s.class_conditional.p_pass_given_legit}});
    }

    json missing = json::object();
    const auto miss = missingness_profile(d);
    for (std::size_t i = 0; i < miss.size(); ++i) missing[d.schema()[i].name] = miss[i];

    const auto corr = correlation_matrix(d, policy);
    json names = json::array();
    for (const auto& c : d.schema().credentials()) names.push_back(c.name);
    json values = json::array();
    json support = json::array();
    for (std::size_t i = 0; i < corr.n; ++i) {
        json row = json::array();
        json srow = json::array();
        for (std::size_t j = 0; j < corr.n; ++j) {
            row.push_back(opt(corr.at(i, j)));
            srow.push_back(corr.support_at(i, j));
        }
        values.push_back(row);
        support.push_back(srow);
    }

    return {{"n_total", d.n_total()},
            {"n_fraud", d.n_fraud()},
            {"prior_fraud", prior_fraud(d)},
            {"credentials", creds},
            {"missingness", missing},
            {"correlation",
             {{"policy", to_string(policy)}, {"credentials", names}, {"values", values}, {"support", support}}}};
}

json posterior_report(const Belief& b) {
    json trail = json::array();
    for (const auto& e : b.evidence_trail)
        trail.push_back({{"credential", e.credential.name}, {"outcome", to_string(e.outcome)}});
    return {{"posterior", b.posterior_fraud}, {"mode", to_string(b.mode)}, {"support", b.support}, {"evidence", trail}};
}

std::string pairs_csv(const std::vector<PairReport>& reports) {
    std::string out = "pair,fraud_rate_given_both_pass,tpr,fpr,pass_both_rate,youden_j\n";
    for (const auto& r : reports) {
        out += r.name();
        out += ',';
        if (r.fraud_rate_given_both_pass) out += format_double(*r.fraud_rate_given_both_pass);
        for (double v : {r.tpr, r.fpr, r.pass_both_rate, r.youden_j}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

json pairs_json(const std::vector<PairReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(pair_json(r));
    return {{"pairs", arr}};
}

json backtest_report(const BacktestSummary& s) {
    return {{"n_total", s.n_total},
            {"n_fraud", s.n_fraud},
            {"accepted", s.accepted},
            {"blocked", s.blocked},
            {"escalated", s.escalated},
            {"fraud_blocked", s.fraud_blocked},
            {"legit_blocked", s.legit_blocked},
            {"fraud_accepted", s.fraud_accepted},
            {"fraud_block_rate", s.fraud_block_rate},
            {"legit_block_rate", s.legit_block_rate},
            {"mean_steps", s.mean_steps},
            {"accept_fraud_rate", opt(s.accept_fraud_rate)}};
}

}  // namespace ivrauth
