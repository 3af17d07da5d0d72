#pragma once
// Line-delimited JSON scoring service over a compiled Policy.
//
// Request  {"session_id": str, "prior_override": num?, "evidence": [{"credential": str, "outcome": "pass"|"fail"}]}
// Response {"session_id": str, "posterior": num, "decision": "accept"|"block"|"continue",
//           "next_credential": str|null, "policy_fingerprint": str}
// Error    {"session_id": str|null, "error": {"code": str, "message": str}}
//
// Stateless: every request carries the full evidence. Evidence that follows
// a policy path is answered from the tree; any other evidence set (or a
// prior override) is evaluated with the same node rule the compiler uses.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ivrauth/policy_io.hpp"
#include "ivrauth/sequencer.hpp"

namespace ivrauth {

struct ScoreRequest {
    std::string session_id;
    std::optional<double> prior_override;
    std::vector<EvidenceItem> evidence;
};

struct ScoreResponse {
    std::string session_id;
    double posterior = 0.0;
    std::string decision;  // accept | block | continue
    std::optional<std::string> next_credential;
    std::string policy_fingerprint;
};

class RequestError : public std::runtime_error {
public:
    RequestError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

class ScoringService {
public:
    explicit ScoringService(Policy policy);

    const Policy& policy() const { return policy_; }
    const std::string& fingerprint() const { return fingerprint_; }

    // Throws RequestError.
    ScoreResponse score(const ScoreRequest& req) const;

    // One request line in, one response line out (no trailing newline).
    // Never throws for bad input; errors become error responses.
    std::string handle_line(std::string_view line) const;

private:
    Policy policy_;
    std::string fingerprint_;
};

ScoreRequest parse_request(std::string_view line);  // throws RequestError
std::string format_response(const ScoreResponse& r);
std::string format_error(const std::optional<std::string>& session_id, const std::string& code,
                         const std::string& message);

// Serves until EOF on `in`. Blank lines are skipped.
void serve_stream(const ScoringService& service, std::istream& in, std::ostream& out);

// TCP listener, one thread per connection. The Policy is shared read-only.
class TcpServer {
public:
    // Binds immediately; port 0 picks an ephemeral port.
    TcpServer(const ScoringService& service, const std::string& host, std::uint16_t port);
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    std::uint16_t port() const { return port_; }
    // Blocks until stop() is called.
    void run();
    void stop();

private:
    void serve_connection(int fd) const;

    const ScoringService& service_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
};

}  // namespace ivrauth
