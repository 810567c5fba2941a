#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "faasbench/http.hpp"
#include "faasbench/metrics.hpp"
#include "faasbench/protocol.hpp"

namespace faasbench::proxy {

struct ProxyConfig {
    std::string listen_host = "127.0.0.1";
    std::int64_t forward_timeout_ms = 30'000;
    std::int64_t injected_latency_ms = 0;  // emulates region distance
    std::vector<std::string> allowed_target_hosts;  // empty = allow all
};

enum class FailureKind { HostNotAllowed, ConnectFailure, TimeoutFailure };

struct TargetReply {
    int http_status = 0;
    std::string header_block;  // reassembled status line + headers
    std::string body;
};

using ForwardResult = std::variant<TargetReply, FailureKind>;

// One HTTP POST of the re-encoded envelope to the target.
ForwardResult forward(const protocol::RequestEnvelope& env, const std::string& target_uri,
                      std::int64_t timeout_ms,
                      const std::vector<std::string>& allowed_hosts = {});

struct InvocationOutcome {
    int http_status = 200;
    std::string body;  // always a well-formed ResponseEnvelope
};

// The full proxy pipeline for one request body: decode, measure the
// forwarded request (m2), forward, measure the reply (m3), merge target and
// proxy fields, encode.
InvocationOutcome handle_invocation(const std::string& raw_body, const ProxyConfig& config);

class ProxyServer {
public:
    explicit ProxyServer(ProxyConfig config = {});
    ~ProxyServer();

    int start(int port = 0);
    void stop();
    int port() const { return runner_.port(); }
    std::string uri() const;

    const ProxyConfig& config() const { return config_; }

private:
    ProxyConfig config_;
    httplib::Server server_;
    http::ServerRunner runner_;
};

}  // namespace faasbench::proxy
