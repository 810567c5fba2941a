#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "faasbench/http.hpp"
#include "faasbench/protocol.hpp"

namespace faasbench::targets {

// Number of maximal runs of non-space (U+0020) characters. Tabs and
// newlines are letters, not separators.
std::uint64_t count_words(std::string_view text);

// Number of non-space characters; a multi-byte UTF-8 sequence counts once.
std::uint64_t count_letters(std::string_view text);

// Emulated platform characteristics applied around every target handler.
struct GatewayConfig {
    std::int64_t execution_limit_ms = 30'000;
    std::int64_t cold_start_delay_ms = 0;
    std::int64_t warm_window_ms = 60'000;
    bool header_echo = false;
};

// Last-invocation tracking for warm/cold decisions. Shared cell, updated
// under the lock.
struct InstanceState {
    std::mutex mutex;
    std::int64_t last_invocation_epoch_ms = 0;
    bool ever_invoked = false;
};

// Pure target handlers, exposed for direct testing. The sleep handler honors
// the cancel flag so an aborted invocation stops sleeping promptly.
protocol::ResponseEnvelope handle_wordcount(const protocol::RequestEnvelope& env);

struct CancelToken;
protocol::ResponseEnvelope handle_sleep(const protocol::RequestEnvelope& env,
                                        const std::shared_ptr<CancelToken>& cancel);

// HTTP server exposing /func/word and /func/sleep behind the gateway
// emulation (cold start, execution limit watchdog, header echo).
class TargetServer {
public:
    explicit TargetServer(GatewayConfig config = {});
    ~TargetServer();

    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    int port() const { return runner_.port(); }
    std::string uri(std::string_view path) const;

    const GatewayConfig& config() const { return config_; }

private:
    void dispatch(const httplib::Request& req, httplib::Response& res, bool sleeper);

    GatewayConfig config_;
    InstanceState state_;
    std::string host_ = "127.0.0.1";
    httplib::Server server_;
    http::ServerRunner runner_;
};

}  // namespace faasbench::targets
