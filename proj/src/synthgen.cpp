#include "ivrauth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace ivrauth {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Latent cut point; +/-inf at the edges.
double normal_threshold(double q) {
    if (q <= 0.0) return -std::numeric_limits<double>::infinity();
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(boost::math::normal_distribution<double>(), q);
}

// P(both latent coordinates fall below their cut points).
double joint_pass(double qa, double qb, double rho) {
    if (qa <= 0.0 || qb <= 0.0) return 0.0;
    if (qa >= 1.0) return qb;
    if (qb >= 1.0) return qa;
    return bivariate_normal_cdf(normal_threshold(qa), normal_threshold(qb), rho);
}

}  // namespace

Schema GeneratorSpec::schema() const {
    std::vector<CredentialId> ids;
    for (const auto& c : credentials) ids.push_back(c.id);
    return Schema(std::move(ids));
}

void GeneratorSpec::validate() const {
    const auto k = static_cast<Eigen::Index>(credentials.size());
    schema();
    if (!is_probability(fraud_prior)) throw DataError("fraud_prior must lie in [0, 1]");
    for (const auto& c : credentials) {
        if (!is_probability(c.pass_given_fraud) || !is_probability(c.pass_given_legit) ||
            !is_probability(c.missing_rate))
            throw DataError("credential " + c.id.name + ": probabilities must lie in [0, 1]");
    }
    if (latent_correlation.rows() != k || latent_correlation.cols() != k)
        throw DataError("latent correlation must be " + std::to_string(k) + "x" + std::to_string(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(latent_correlation(i, i) - 1.0) > 1e-12)
            throw DataError("latent correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = latent_correlation(i, j);
            if (!std::isfinite(v) || std::abs(v - latent_correlation(j, i)) > 1e-12)
                throw DataError("latent correlation must be symmetric");
            if (v < -1.0 || v > 1.0) throw DataError("latent correlation entries must lie in [-1, 1]");
        }
    }
    if (k > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(latent_correlation, Eigen::EigenvaluesOnly);
        const double smallest = eig.eigenvalues().minCoeff();
        if (smallest < -1e-10)
            throw DataError("latent correlation is not positive semi-definite: eigenvalue " +
                            std::to_string(smallest) + " is negative");
    }
}

double latent_pass_probability(double pass_rate, double missing_rate) {
    if (missing_rate >= 1.0) return 0.0;
    return std::clamp(pass_rate / (1.0 - missing_rate), 0.0, 1.0);
}

Dataset generate(const GeneratorSpec& spec) {
    spec.validate();
    const std::size_t k = spec.credentials.size();

    // Pivoted LDLT handles semi-definite matrices: C = P^T L D L^T P.
    Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    if (k > 0) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(spec.latent_correlation);
        const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
        Eigen::MatrixXd l = ldlt.matrixL();
        factor = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
    }

    std::vector<double> cut_fraud(k), cut_legit(k);
    for (std::size_t c = 0; c < k; ++c) {
        const auto& cs = spec.credentials[c];
        cut_fraud[c] = normal_threshold(latent_pass_probability(cs.pass_given_fraud, cs.missing_rate));
        cut_legit[c] = normal_threshold(latent_pass_probability(cs.pass_given_legit, cs.missing_rate));
    }

    boost::random::mt19937_64 rng(spec.seed);
    boost::random::uniform_01<double> uniform;
    boost::random::normal_distribution<double> normal;

    // Exactly round(prior * n) fraud labels, placed by a seeded Fisher-Yates shuffle.
    const auto n_fraud = static_cast<std::size_t>(std::llround(spec.fraud_prior * static_cast<double>(spec.n_total)));
    std::vector<char> is_fraud(spec.n_total, 0);
    std::fill_n(is_fraud.begin(), std::min(n_fraud, spec.n_total), 1);
    for (std::size_t i = spec.n_total; i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(is_fraud[i - 1], is_fraud[pick(rng)]);
    }

    std::vector<CallRecord> records;
    records.reserve(spec.n_total);
    Eigen::VectorXd z(static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < spec.n_total; ++r) {
        CallRecord rec;
        rec.is_fraud = is_fraud[r] != 0;
        for (std::size_t c = 0; c < k; ++c) z(static_cast<Eigen::Index>(c)) = normal(rng);
        const Eigen::VectorXd x = factor * z;
        const auto& cut = rec.is_fraud ? cut_fraud : cut_legit;
        rec.outcomes.resize(k);
        for (std::size_t c = 0; c < k; ++c) {
            const bool pass = x(static_cast<Eigen::Index>(c)) < cut[c];
            const bool missing = uniform(rng) < spec.credentials[c].missing_rate;
            rec.outcomes[c] = missing ? Outcome::Missing : (pass ? Outcome::Pass : Outcome::Fail);
        }
        records.push_back(std::move(rec));
    }
    return Dataset(spec.schema(), std::move(records));
}

double bivariate_normal_cdf(double h, double k, double rho) {
    if (std::isinf(h) || std::isinf(k)) {
        if (h == -std::numeric_limits<double>::infinity() || k == -std::numeric_limits<double>::infinity()) return 0.0;
        if (std::isinf(h)) return normal_cdf(k);
        return normal_cdf(h);
    }
    // Phi2(h, k; rho) = Phi(h) Phi(k) + 1/(2 pi) * int_0^rho exp(-(h^2 - 2rhk + k^2) / (2(1 - r^2))) / sqrt(1 - r^2) dr
    const auto integrand = [h, k](double r) {
        const double one_minus = 1.0 - r * r;
        if (one_minus <= 0.0) return 0.0;
        return std::exp(-(h * h - 2.0 * r * h * k + k * k) / (2.0 * one_minus)) / std::sqrt(one_minus);
    };
    const double integral =
        rho == 0.0 ? 0.0 : boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, rho, 15, 1e-13);
    return normal_cdf(h) * normal_cdf(k) + integral / (2.0 * std::numbers::pi);
}

double expected_phi(double rho, double prior, double qa_fraud, double qb_fraud, double qa_legit, double qb_legit) {
    const double pa = prior * qa_fraud + (1.0 - prior) * qa_legit;
    const double pb = prior * qb_fraud + (1.0 - prior) * qb_legit;
    const double pab = prior * joint_pass(qa_fraud, qb_fraud, rho) + (1.0 - prior) * joint_pass(qa_legit, qb_legit, rho);
    const double denom = std::sqrt(pa * (1.0 - pa) * pb * (1.0 - pb));
    if (!(denom > 0.0)) return 0.0;
    return (pab - pa * pb) / denom;
}

double latent_correlation_for_phi(double target_phi, double prior, double qa_fraud, double qb_fraud,
                                  double qa_legit, double qb_legit) {
    const auto phi = [&](double rho) { return expected_phi(rho, prior, qa_fraud, qb_fraud, qa_legit, qb_legit); };
    double lo = -0.9999, hi = 0.9999;
    if (target_phi <= phi(lo)) return lo;
    if (target_phi >= phi(hi)) return hi;
    for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < target_phi ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

GeneratorSpec builtin_spec() {
    struct Row {
        const char* name;
        double pass;
        double fraud_rate_given_pass;
        int missing;  // out of 5,000
    };
    // Pass / fraud-rate-when-pass per credential. Missing counts: A-G span
    // 218..934, H-J hold 40-60% with J at 3,006. B's count keeps its
    // availability-conditional legit pass rate level with A's so the (A,B)
    // correlation target stays attainable.
    static constexpr Row kRows[] = {
        {"A", 0.8590, 0.04494, 218},  {"B", 0.8086, 0.04477, 497},  {"C", 0.7142, 0.03500, 560},
        {"D", 0.7866, 0.02670, 640},  {"E", 0.6026, 0.00664, 720},  {"F", 0.5474, 0.00438, 830},
        {"G", 0.4948, 0.00000, 934},  {"H", 0.2966, 0.00067, 2150}, {"I", 0.1944, 0.00000, 2600},
        {"J", 0.1124, 0.00000, 3006},
    };
    constexpr double kPrior = 0.0388;
    constexpr double kReferenceN = 5000.0;

    GeneratorSpec spec;
    spec.n_total = 5000;
    spec.fraud_prior = kPrior;
    spec.seed = 7;
    for (const auto& row : kRows) {
        CredentialSpec c;
        c.id = {row.name};
        c.pass_given_fraud = std::clamp(row.fraud_rate_given_pass * row.pass / kPrior, 0.0, 1.0);
        c.pass_given_legit = std::clamp((row.pass - kPrior * c.pass_given_fraud) / (1.0 - kPrior), 0.0, 1.0);
        c.missing_rate = row.missing / kReferenceN;
        c.target_pass_rate = row.pass;
        c.target_fraud_rate_given_pass = row.fraud_rate_given_pass;
        spec.credentials.push_back(c);
    }

    spec.correlation_targets = {{{"A"}, {"B"}, 0.87}, {{"H"}, {"I"}, 0.16}, {{"H"}, {"J"}, 0.07}};

    const auto k = static_cast<Eigen::Index>(spec.credentials.size());
    spec.latent_correlation = Eigen::MatrixXd::Identity(k, k);
    const Schema schema = spec.schema();
    for (const auto& target : spec.correlation_targets) {
        const auto a = schema.index_of(target.a.name);
        const auto b = schema.index_of(target.b.name);
        const auto& ca = spec.credentials[a];
        const auto& cb = spec.credentials[b];
        const double rho = latent_correlation_for_phi(
            target.phi, kPrior, latent_pass_probability(ca.pass_given_fraud, ca.missing_rate),
            latent_pass_probability(cb.pass_given_fraud, cb.missing_rate),
            latent_pass_probability(ca.pass_given_legit, ca.missing_rate),
            latent_pass_probability(cb.pass_given_legit, cb.missing_rate));
        spec.latent_correlation(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rho;
        spec.latent_correlation(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = rho;
    }
    return spec;
}

nlohmann::json spec_to_json(const GeneratorSpec& spec) {
    using nlohmann::json;
    json creds = json::array();
    for (const auto& c : spec.credentials) {
        json jc = {{"name", c.id.name},
                   {"pass_given_fraud", c.pass_given_fraud},
                   {"pass_given_legit", c.pass_given_legit},
                   {"missing_rate", c.missing_rate}};
        if (c.target_pass_rate) jc["target_pass_rate"] = *c.target_pass_rate;
        if (c.target_fraud_rate_given_pass) jc["target_fraud_rate_given_pass"] = *c.target_fraud_rate_given_pass;
        creds.push_back(jc);
    }
    json matrix = json::array();
    for (Eigen::Index i = 0; i < spec.latent_correlation.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < spec.latent_correlation.cols(); ++j) row.push_back(spec.latent_correlation(i, j));
        matrix.push_back(row);
    }
    json targets = json::array();
    for (const auto& t : spec.correlation_targets) targets.push_back({{"a", t.a.name}, {"b", t.b.name}, {"phi", t.phi}});
    return {{"credentials", creds},
            {"n_total", spec.n_total},
            {"fraud_prior", spec.fraud_prior},
            {"latent_correlation", matrix},
            {"correlation_targets", targets},
            {"seed", spec.seed}};
}

GeneratorSpec spec_from_json(const nlohmann::json& doc) {
    GeneratorSpec spec;
    try {
        for (const auto& jc : doc.at("credentials")) {
            CredentialSpec c;
            c.id = {jc.at("name").get<std::string>()};
            c.pass_given_fraud = jc.at("pass_given_fraud").get<double>();
            c.pass_given_legit = jc.at("pass_given_legit").get<double>();
            c.missing_rate = jc.value("missing_rate", 0.0);
            if (jc.contains("target_pass_rate")) c.target_pass_rate = jc.at("target_pass_rate").get<double>();
            if (jc.contains("target_fraud_rate_given_pass"))
                c.target_fraud_rate_given_pass = jc.at("target_fraud_rate_given_pass").get<double>();
            spec.credentials.push_back(c);
        }
        spec.n_total = doc.at("n_total").get<std::size_t>();
        spec.fraud_prior = doc.at("fraud_prior").get<double>();
        spec.seed = doc.value("seed", std::uint64_t{0});

        const auto k = static_cast<Eigen::Index>(spec.credentials.size());
        if (doc.contains("latent_correlation")) {
            const auto& m = doc.at("latent_correlation");
            if (m.size() != static_cast<std::size_t>(k)) throw DataError("latent_correlation has wrong row count");
            spec.latent_correlation.resize(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                if (m.at(i).size() != static_cast<std::size_t>(k)) throw DataError("latent_correlation has a ragged row");
                for (Eigen::Index j = 0; j < k; ++j) spec.latent_correlation(i, j) = m.at(i).at(j).get<double>();
            }
        } else {
            spec.latent_correlation = Eigen::MatrixXd::Identity(k, k);
        }
        if (doc.contains("correlation_targets"))
            for (const auto& t : doc.at("correlation_targets"))
                spec.correlation_targets.push_back(
                    {{t.at("a").get<std::string>()}, {t.at("b").get<std::string>()}, t.at("phi").get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed generator spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

GeneratorSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed generator spec: ") + e.what());
    }
    return spec_from_json(doc);
}

}  // namespace ivrauth
