// ivrauth command-line interface.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ivrauth/bayes.hpp"
#include "ivrauth/csv_io.hpp"
#include "ivrauth/estimator.hpp"
#include "ivrauth/pairs.hpp"
#include "ivrauth/policy_io.hpp"
#include "ivrauth/report.hpp"
#include "ivrauth/sequencer.hpp"
#include "ivrauth/service.hpp"
#include "ivrauth/synthgen.hpp"

using namespace ivrauth;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string input;
    std::string output;
    std::string format;
    std::optional<std::uint64_t> seed;
};

void emit(const Globals& g, const std::string& text) {
    if (g.output.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(g.output, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + g.output);
    out << text;
    if (!out) throw DataError("write failed for " + g.output);
}

const std::string& require_input(const Globals& g) {
    if (g.input.empty()) throw UsageError("--input FILE is required");
    return g.input;
}

std::string format_or(const Globals& g, const std::string& fallback, std::initializer_list<const char*> allowed) {
    const std::string f = g.format.empty() ? fallback : g.format;
    for (const char* a : allowed)
        if (f == a) return f;
    throw UsageError("unsupported --format '" + f + "' for this command");
}

EvidenceItem parse_ev(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--ev expects CRED=pass|fail, got '" + text + "'");
    const std::string outcome = text.substr(eq + 1);
    if (outcome != "pass" && outcome != "fail") throw UsageError("--ev outcome must be pass or fail, got '" + outcome + "'");
    return {{text.substr(0, eq)}, parse_observation(outcome)};
}

TcpServer* g_server = nullptr;

extern "C" void handle_stop(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian fraud-risk estimation and adaptive credential ordering for IVR authentication"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("-i,--input", g.input, "Input call-log CSV");
    app.add_option("-o,--output,--out", g.output, "Output file (default: stdout)");
    app.add_option("--format", g.format, "Report format: json or csv");
    app.add_option("--seed", g.seed, "Random seed");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic call log");
    std::string spec_file;
    bool builtin_defaults = false;
    bool emit_spec = false;
    std::optional<std::size_t> gen_n;
    auto* spec_opt = gen->add_option("--spec", spec_file, "Generator spec JSON")->check(CLI::ExistingFile);
    gen->add_flag("--paper-defaults", builtin_defaults, "Use the built-in spec reproducing the published statistics")
        ->excludes(spec_opt);
    gen->add_flag("--emit-spec", emit_spec, "Write the generator spec JSON instead of data");
    gen->add_option("-n,--records", gen_n, "Number of records (overrides the spec)");

    // stats
    auto* stats = app.add_subcommand("stats", "Per-credential statistics, missingness and correlations (JSON)");
    std::string null_policy = "pairwise-delete";
    stats->add_option("--null-policy", null_policy, "pairwise-delete or null-as-fail")
        ->check(CLI::IsMember({"pairwise-delete", "null-as-fail"}));

    // posterior
    auto* post = app.add_subcommand("posterior", "Posterior fraud probability for observed outcomes (JSON)");
    std::vector<std::string> evs;
    std::string mode = "empirical";
    std::size_t min_support = 30;
    bool fallback = false;
    std::optional<double> prior_override;
    post->add_option("--ev", evs, "Evidence CRED=pass|fail (repeatable)")->required();
    post->add_option("--mode", mode, "empirical or naive")->check(CLI::IsMember({"empirical", "naive"}));
    post->add_option("--min-support", min_support, "Minimum matching records for empirical mode");
    post->add_flag("--fallback", fallback, "Fall back to naive mode on insufficient support");
    post->add_option("--prior", prior_override, "Override the dataset prior")->check(CLI::Range(0.0, 1.0));

    // pairs
    auto* pairs = app.add_subcommand("pairs", "Evaluate and rank all two-credential gates (CSV or JSON)");
    std::string objective = "min-posterior";
    double fpr_cap = 1.0;
    std::optional<std::size_t> top;
    pairs->add_option("--objective", objective, "min-posterior, max-youden or max-tpr")
        ->check(CLI::IsMember({"min-posterior", "max-youden", "max-tpr"}));
    pairs->add_option("--fpr-cap", fpr_cap, "FPR cap for max-tpr")->check(CLI::Range(0.0, 1.0));
    pairs->add_option("--top", top, "Keep only the first K pairs");

    // policy build
    auto* policy = app.add_subcommand("policy", "Adaptive policy commands");
    policy->require_subcommand(1);
    auto* build = policy->add_subcommand("build", "Compile an adaptive credential-ordering policy (JSON)");
    SequencerOptions seq;
    std::string seq_mode = "empirical", criterion = "pass-posterior", on_exhaust = "block";
    std::optional<double> step_cap;
    build->add_option("--accept-below", seq.thresholds.accept_below, "Accept when belief falls below this");
    build->add_option("--block-above", seq.thresholds.block_above, "Block when belief exceeds this");
    build->add_option("--max-steps", seq.thresholds.max_steps, "Maximum credentials asked per call");
    build->add_option("--fpr-step-cap", step_cap, "Skip candidates failing more legit callers than this")
        ->check(CLI::Range(0.0, 1.0));
    build->add_option("--mode", seq_mode, "empirical or naive")->check(CLI::IsMember({"empirical", "naive"}));
    build->add_option("--min-support", seq.min_support, "Minimum matching records for empirical beliefs");
    build->add_option("--criterion", criterion, "pass-posterior or expected-posterior")
        ->check(CLI::IsMember({"pass-posterior", "expected-posterior"}));
    build->add_option("--on-exhaust", on_exhaust, "Label for exhausted paths: block or escalate")
        ->check(CLI::IsMember({"block", "escalate"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "Backtest a policy on a call log (JSON)");
    std::string policy_file;
    sim->add_option("--policy", policy_file, "Policy JSON")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Score sessions over line-delimited JSON");
    std::string serve_policy, listen;
    bool use_stdio = false;
    serve->add_option("--policy", serve_policy, "Policy JSON")->required();
    auto* listen_opt = serve->add_option("--listen", listen, "HOST:PORT");
    serve->add_flag("--stdio", use_stdio, "Serve on standard input/output")->excludes(listen_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return 1;
    }

    try {
        if (gen->parsed()) {
            if (!builtin_defaults && spec_file.empty()) throw UsageError("gen needs --spec FILE or --paper-defaults");
            GeneratorSpec spec = builtin_defaults ? builtin_spec() : load_spec(spec_file);
            if (gen_n) spec.n_total = *gen_n;
            if (g.seed) spec.seed = *g.seed;
            if (emit_spec) {
                emit(g, spec_to_json(spec).dump(2) + "\n");
            } else {
                std::ostringstream csv;
                write_csv(generate(spec), csv);
                emit(g, csv.str());
            }
        } else if (stats->parsed()) {
            format_or(g, "json", {"json"});
            const auto d = load_csv(require_input(g));
            emit(g, stats_report(d, parse_null_policy(null_policy)).dump(2) + "\n");
        } else if (post->parsed()) {
            format_or(g, "json", {"json"});
            const auto d = load_csv(require_input(g));
            std::vector<EvidenceItem> evidence;
            for (const auto& e : evs) evidence.push_back(parse_ev(e));
            PosteriorOptions opts{parse_belief_mode(mode), min_support, fallback, prior_override};
            emit(g, posterior_report(sequential_posterior(d, evidence, opts)).dump(2) + "\n");
        } else if (pairs->parsed()) {
            const auto fmt = format_or(g, "csv", {"csv", "json"});
            const auto d = load_csv(require_input(g));
            auto ranked = rank_pairs(d, parse_pair_objective(objective, fpr_cap));
            if (top && ranked.size() > *top) ranked.resize(*top);
            emit(g, fmt == "csv" ? pairs_csv(ranked) : pairs_json(ranked).dump(2) + "\n");
        } else if (build->parsed()) {
            format_or(g, "json", {"json"});
            const auto d = load_csv(require_input(g));
            seq.thresholds.fpr_step_cap = step_cap;
            seq.mode = parse_belief_mode(seq_mode);
            seq.criterion = parse_criterion(criterion);
            seq.on_exhaust = parse_exhaust_action(on_exhaust);
            emit(g, serialize_policy(compile_policy(d, seq)));
        } else if (sim->parsed()) {
            format_or(g, "json", {"json"});
            const auto p = load_policy(policy_file);
            const auto d = load_csv(require_input(g));
            emit(g, backtest_report(backtest(d, p)).dump(2) + "\n");
        } else if (serve->parsed()) {
            if (use_stdio == !listen.empty()) throw UsageError("serve needs exactly one of --listen HOST:PORT or --stdio");
            const ScoringService service(load_policy(serve_policy));
            if (use_stdio) {
                serve_stream(service, std::cin, std::cout);
                return 0;
            }
            const auto colon = listen.rfind(':');
            if (colon == std::string::npos) throw UsageError("--listen expects HOST:PORT");
            int port = 0;
            try {
                port = std::stoi(listen.substr(colon + 1));
            } catch (const std::exception&) {
                throw UsageError("invalid port in --listen");
            }
            if (port < 0 || port > 65535) throw UsageError("invalid port in --listen");
            std::string host = listen.substr(0, colon);
            if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
            TcpServer server(service, host, static_cast<std::uint16_t>(port));
            g_server = &server;
            std::signal(SIGINT, handle_stop);
            std::signal(SIGTERM, handle_stop);
            std::cerr << "listening on " << host << ":" << server.port() << " policy " << service.fingerprint() << "\n";
            server.run();
            g_server = nullptr;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
