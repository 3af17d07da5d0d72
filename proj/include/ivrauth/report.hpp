#pragma once
// Machine-readable reports emitted by the CLI.

#include <string>
#include <vector>

#include <json.hpp>

#include "ivrauth/bayes.hpp"
#include "ivrauth/estimator.hpp"
#include "ivrauth/pairs.hpp"
#include "ivrauth/sequencer.hpp"

namespace ivrauth {

// Per-credential stats, missingness, and the correlation matrix under
// `policy` (null cells are undefined).
nlohmann::json stats_report(const Dataset& d, NullPolicy policy);

nlohmann::json posterior_report(const Belief& b);

// Columns: pair,fraud_rate_given_both_pass,tpr,fpr,pass_both_rate,youden_j
// Undefined fraud rates are empty cells.
std::string pairs_csv(const std::vector<PairReport>& reports);
nlohmann::json pairs_json(const std::vector<PairReport>& reports);

nlohmann::json backtest_report(const BacktestSummary& s);

// Shortest round-trip decimal form, as used in every report.
std::string format_double(double v);

}  // namespace ivrauth
