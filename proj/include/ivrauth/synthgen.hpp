#pragma once
// Seedable synthetic call-log generator (Gaussian copula).
//
// Class labels: exactly round(fraud_prior * n_total) records are fraud,
// placed by a seeded shuffle. Per record: draw a latent normal vector
// with the shared correlation matrix, threshold each coordinate at the
// class's normal quantile, then overwrite each cell with Missing
// independently at the credential's missing rate.
//
// Class pass probabilities use the published convention: Missing counts as not
// passing, so P(pass | class) = (1 - missing_rate) * q where q is the
// latent threshold probability. The generator solves for q and clamps it
// to [0, 1] when the requested pass rate exceeds availability.
//
// Random numbers: boost::random::mt19937_64 feeding
// boost::random::uniform_01 and boost::random::normal_distribution
// (ziggurat). Both algorithms are fixed by Boost's headers, so a seed
// reproduces the same dataset on every platform.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ivrauth/model.hpp"

namespace ivrauth {

struct CredentialSpec {
    CredentialId id;
    double pass_given_fraud = 0.0;
    double pass_given_legit = 0.0;
    double missing_rate = 0.0;
    // Published statistics the class rates were back-solved from.
    std::optional<double> target_pass_rate;
    std::optional<double> target_fraud_rate_given_pass;
};

struct CorrelationTarget {
    CredentialId a;
    CredentialId b;
    double phi = 0.0;  // observed pass/fail correlation, pairwise deletion
};

struct GeneratorSpec {
    std::vector<CredentialSpec> credentials;
    std::size_t n_total = 0;
    double fraud_prior = 0.0;
    Eigen::MatrixXd latent_correlation;
    std::vector<CorrelationTarget> correlation_targets;
    std::uint64_t seed = 0;

    Schema schema() const;
    // Throws DataError on out-of-range probabilities, shape mismatch,
    // asymmetry, non-unit diagonal, or a negative eigenvalue (named).
    void validate() const;
};

Dataset generate(const GeneratorSpec& spec);

GeneratorSpec builtin_spec();

// Latent threshold probability q with P(pass) = (1 - missing) * q, clamped.
double latent_pass_probability(double pass_rate, double missing_rate);

// P(X < h, Y < k) for a standard bivariate normal with correlation rho.
double bivariate_normal_cdf(double h, double k, double rho);

// Expected phi between two generated credentials over records where both
// are present, for a given latent correlation. q* are latent threshold
// probabilities per class.
double expected_phi(double rho, double prior, double qa_fraud, double qb_fraud, double qa_legit,
                    double qb_legit);

// Latent correlation whose expected phi equals target_phi (bisection).
// Clamped to the achievable range.
double latent_correlation_for_phi(double target_phi, double prior, double qa_fraud, double qb_fraud,
                                  double qa_legit, double qb_legit);

nlohmann::json spec_to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const nlohmann::json& doc);
GeneratorSpec load_spec(const std::filesystem::path& path);

}  // namespace ivrauth
