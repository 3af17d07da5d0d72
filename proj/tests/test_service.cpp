#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sstream>
#include <thread>

#include "ivrauth/service.hpp"
#include "oracles.hpp"

using namespace ivrauth;
using nlohmann::json;

namespace {

ScoringService make_service() {
    const auto d = oracle::from_rows(Schema{"X", "Y", "Z"},
                                     {"PPF1", "PFP1", "FPP1", "PPP0", "PPF0", "PFP0", "FPP0", "PFF0", "FFP0", "PPP0"});
    SequencerOptions o;
    o.thresholds.accept_below = 0.26;
    o.thresholds.block_above = 0.35;
    o.thresholds.max_steps = 2;
    o.min_support = 1;
    return ScoringService(compile_policy(d, o));
}

json call(const ScoringService& s, const std::string& line) { return json::parse(s.handle_line(line)); }

std::string error_code(const ScoringService& s, const std::string& line) {
    const auto r = call(s, line);
    return r.contains("error") ? r["error"]["code"].get<std::string>() : "";
}

std::string roundtrip(int fd, const std::string& line) {
    const std::string msg = line + "\n";
    REQUIRE(::send(fd, msg.data(), msg.size(), 0) == static_cast<ssize_t>(msg.size()));
    std::string out;
    char c;
    while (::recv(fd, &c, 1, 0) == 1 && c != '\n') out += c;
    return out;
}

}  // namespace

TEST_SUITE("scoring-service") {

TEST_CASE("empty evidence continues with the root question") {
    const auto s = make_service();
    const auto r = call(s, R"({"session_id":"s1","evidence":[]})");
    CHECK(r["session_id"] == "s1");
    CHECK(r["decision"] == "continue");
    CHECK(r["next_credential"] == "X");
    CHECK(r["posterior"].get<double>() == doctest::Approx(0.3));
    CHECK(r["policy_fingerprint"] == s.fingerprint());
}

TEST_CASE("evidence on a policy path follows the tree") {
    const auto s = make_service();
    auto r = call(s, R"({"session_id":"a","evidence":[{"credential":"X","outcome":"pass"},{"credential":"Y","outcome":"pass"}]})");
    CHECK(r["decision"] == "accept");
    CHECK(r["next_credential"].is_null());
    r = call(s, R"({"session_id":"b","evidence":[{"credential":"Z","outcome":"fail"},{"credential":"X","outcome":"fail"}]})");
    CHECK(r["decision"] == "block");
    CHECK(r["posterior"].get<double>() == doctest::Approx(7.0 / 19.0));
}

TEST_CASE("off-path evidence is evaluated directly") {
    const auto s = make_service();
    const auto r = call(s, R"({"session_id":"c","evidence":[{"credential":"Y","outcome":"pass"}]})");
    CHECK(r["posterior"].get<double>() == doctest::Approx(1.0 / 3.0));
    CHECK(r["decision"] == "continue");
}

TEST_CASE("prior override") {
    const auto s = make_service();
    const auto r = call(s, R"({"session_id":"p","prior_override":0.9,"evidence":[]})");
    CHECK(r["posterior"].get<double>() == doctest::Approx(0.9));
    CHECK(r["decision"] == "block");
}

TEST_CASE("error codes") {
    const auto s = make_service();
    CHECK(error_code(s, "{bad") == "malformed_json");
    CHECK(error_code(s, "[]") == "invalid_request");
    CHECK(error_code(s, R"({"evidence":[]})") == "invalid_request");
    CHECK(error_code(s, R"({"session_id":"x"})") == "invalid_request");
    CHECK(error_code(s, R"({"session_id":"x","prior_override":2,"evidence":[]})") == "invalid_prior");
    CHECK(error_code(s, R"({"session_id":"x","prior_override":"0.1","evidence":[]})") == "invalid_prior");
    CHECK(error_code(s, R"({"session_id":"x","evidence":[{"credential":"X","outcome":"maybe"}]})") == "invalid_outcome");
    CHECK(error_code(s, R"({"session_id":"x","evidence":[{"credential":"Q","outcome":"pass"}]})") == "unknown_credential");
    CHECK(error_code(s, R"({"session_id":"x","evidence":[{"credential":"X","outcome":"pass"},{"credential":"X","outcome":"fail"}]})") ==
          "duplicate_evidence");
    const auto r = call(s, R"({"session_id":"keep","evidence":[{"credential":"Q","outcome":"pass"}]})");
    CHECK(r["session_id"] == "keep");
}

TEST_CASE("stream serving answers one line per request") {
    const auto s = make_service();
    std::istringstream in("{\"session_id\":\"1\",\"evidence\":[]}\n\n{oops\n");
    std::ostringstream out;
    serve_stream(s, in, out);
    std::istringstream lines(out.str());
    std::string a, b, extra;
    REQUIRE(std::getline(lines, a));
    REQUIRE(std::getline(lines, b));
    CHECK(json::parse(a)["decision"] == "continue");
    CHECK(json::parse(b)["error"]["code"] == "malformed_json");
    CHECK_FALSE(std::getline(lines, extra));
}

TEST_CASE("tcp server handles concurrent connections") {
    const auto s = make_service();
    TcpServer server(s, "127.0.0.1", 0);
    REQUIRE(server.port() != 0);
    std::jthread runner([&] { server.run(); });

    auto connect_one = [&] {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(server.port());
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        return fd;
    };
    const int a = connect_one();
    const int b = connect_one();
    const std::string req = R"({"session_id":"t","evidence":[{"credential":"X","outcome":"pass"}]})";
    const std::string expected = s.handle_line(req);
    CHECK(roundtrip(b, req) == expected);
    CHECK(roundtrip(a, req) == expected);
    CHECK(json::parse(roundtrip(a, "{")).contains("error"));
    ::close(a);
    ::close(b);
    server.stop();
}

}
