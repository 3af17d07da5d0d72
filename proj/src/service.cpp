#include "ivrauth/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace ivrauth {

using nlohmann::json;

namespace {

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

}  // namespace

ScoringService::ScoringService(Policy policy)
    : policy_(std::move(policy)), fingerprint_(policy_fingerprint(policy_)) {}

ScoreRequest parse_request(std::string_view line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::exception& e) {
        throw RequestError("malformed_json", e.what());
    }
    if (!doc.is_object()) throw RequestError("invalid_request", "request must be a JSON object");

    ScoreRequest req;
    const auto sid = doc.find("session_id");
    if (sid == doc.end() || !sid->is_string()) throw RequestError("invalid_request", "session_id must be a string");
    req.session_id = sid->get<std::string>();

    if (const auto po = doc.find("prior_override"); po != doc.end() && !po->is_null()) {
        if (!po->is_number()) throw RequestError("invalid_prior", "prior_override must be a number");
        const double v = po->get<double>();
        if (!(v >= 0.0 && v <= 1.0)) throw RequestError("invalid_prior", "prior_override must lie in [0, 1]");
        req.prior_override = v;
    }

    const auto ev = doc.find("evidence");
    if (ev == doc.end() || !ev->is_array()) throw RequestError("invalid_request", "evidence must be an array");
    for (const auto& item : *ev) {
        if (!item.is_object()) throw RequestError("invalid_request", "evidence items must be objects");
        const auto c = item.find("credential");
        const auto o = item.find("outcome");
        if (c == item.end() || !c->is_string()) throw RequestError("invalid_request", "evidence credential must be a string");
        if (o == item.end() || !o->is_string()) throw RequestError("invalid_outcome", "evidence outcome must be a string");
        const auto outcome = o->get<std::string>();
        if (outcome != "pass" && outcome != "fail")
            throw RequestError("invalid_outcome", "outcome must be \"pass\" or \"fail\"");
        req.evidence.push_back({{c->get<std::string>()}, parse_observation(outcome)});
    }
    return req;
}

ScoreResponse ScoringService::score(const ScoreRequest& req) const {
    const auto& schema = policy_.schema();
    EvidenceSet e;
    for (const auto& item : req.evidence) {
        const auto i = schema.find(item.credential.name);
        if (!i) throw RequestError("unknown_credential", "unknown credential '" + item.credential.name + "'");
        if (e.contains(*i))
            throw RequestError("duplicate_evidence", "duplicate evidence for credential '" + item.credential.name + "'");
        e = e.with(*i, item.outcome);
    }

    NodeDecision d;
    bool resolved = false;
    if (!req.prior_override) {
        const PolicyNode* node = &policy_.root();
        std::size_t consumed = 0;
        while (node->decision.action == Action::Ask && e.contains(*node->decision.ask)) {
            const bool passed = (e.passed >> *node->decision.ask) & 1u;
            node = &policy_.nodes[passed ? *node->on_pass : *node->on_fail];
            ++consumed;
        }
        if (consumed == e.size()) {
            d = node->decision;
            resolved = true;
        }
    }
    if (!resolved) d = evaluate_node(policy_.counts, e, policy_.options, req.prior_override);

    ScoreResponse r;
    r.session_id = req.session_id;
    r.posterior = d.belief;
    r.policy_fingerprint = fingerprint_;
    switch (d.action) {
        case Action::Ask:
            r.decision = "continue";
            r.next_credential = schema[*d.ask].name;
            break;
        case Action::Accept: r.decision = "accept"; break;
        case Action::Block: r.decision = "block"; break;
    }
    return r;
}

std::string format_response(const ScoreResponse& r) {
    json doc = {{"session_id", r.session_id},
                {"posterior", r.posterior},
                {"decision", r.decision},
                {"next_credential", r.next_credential ? json(*r.next_credential) : json(nullptr)},
                {"policy_fingerprint", r.policy_fingerprint}};
    return doc.dump();
}

std::string format_error(const std::optional<std::string>& session_id, const std::string& code,
                         const std::string& message) {
    json doc = {{"session_id", session_id ? json(*session_id) : json(nullptr)},
                {"error", {{"code", code}, {"message", message}}}};
    return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string ScoringService::handle_line(std::string_view line) const {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::optional<std::string> sid;
    try {
        // Best effort so errors can echo the session id.
        const auto doc = json::parse(line, nullptr, false);
        if (doc.is_object() && doc.contains("session_id") && doc["session_id"].is_string())
            sid = doc["session_id"].get<std::string>();
    } catch (...) {
    }
    try {
        return format_response(score(parse_request(line)));
    } catch (const RequestError& e) {
        return format_error(sid, e.code(), e.what());
    } catch (const std::exception& e) {
        return format_error(sid, "internal_error", e.what());
    }
}

void serve_stream(const ScoringService& service, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank(line)) continue;
        out << service.handle_line(line) << '\n';
        out.flush();
    }
}

TcpServer::TcpServer(const ScoringService& service, const std::string& host, std::uint16_t port)
    : service_(service) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string port_str = std::to_string(port);
    if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_str.c_str(), &hints, &res); rc != 0)
        throw std::runtime_error("cannot resolve " + host + ": " + ::gai_strerror(rc));

    std::string last_error = "no addresses";
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
            listen_fd_ = fd;
            break;
        }
        last_error = std::strerror(errno);
        ::close(fd);
    }
    ::freeaddrinfo(res);
    if (listen_fd_ < 0) throw std::runtime_error("cannot listen on " + host + ":" + port_str + ": " + last_error);

    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                       : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpServer::~TcpServer() {
    stop();
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::stop() { stopping_ = true; }

void TcpServer::run() {
    std::vector<std::jthread> workers;
    while (!stopping_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, 100);
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        workers.emplace_back([this, fd] { serve_connection(fd); });
    }
    // jthread destructors join; connections notice stopping_ within one poll tick.
}

void TcpServer::serve_connection(int fd) const {
    std::string buffer;
    char chunk[4096];
    bool open = true;
    while (open && !stopping_) {
        pollfd pfd{fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, 100);
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) {
            open = false;
        } else {
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
        std::size_t pos;
        std::string out;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            const auto line = std::string_view(buffer).substr(0, pos);
            if (!is_blank(line)) {
                out += service_.handle_line(line);
                out += '\n';
            }
            buffer.erase(0, pos + 1);
        }
        if (!open && !is_blank(buffer)) {
            out += service_.handle_line(buffer);
            out += '\n';
            buffer.clear();
        }
        std::size_t sent = 0;
        while (sent < out.size()) {
            const ssize_t w = ::send(fd, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
            if (w <= 0) {
                open = false;
                break;
            }
            sent += static_cast<std::size_t>(w);
        }
    }
    ::close(fd);
}

}  // namespace ivrauth
