#include "faasbench/proxy.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace faasbench::proxy {

namespace {

using protocol::RequestEnvelope;
using protocol::ResponseEnvelope;

// Header set cpp-httplib puts on an outgoing POST; reassembled for m2 size
// accounting since the raw egress bytes are not observable in-process.
std::string request_header_block(const protocol::Uri& uri, std::size_t body_bytes) {
    std::string host = uri.host + ":" + std::to_string(uri.port);
    return metrics::build_header_block(
        "POST " + uri.path + " HTTP/1.1",
        {
            {"Host", host},
            {"Accept", "*/*"},
            {"User-Agent", std::string("cpp-httplib/") + CPPHTTPLIB_VERSION},
            {"Content-Type", "application/json"},
            {"Content-Length", std::to_string(body_bytes)},
        });
}

bool host_allowed(const std::string& host, const std::vector<std::string>& allowed) {
    if (allowed.empty()) return true;
    return std::find(allowed.begin(), allowed.end(), host) != allowed.end();
}

InvocationOutcome error_outcome(int status, const std::string& uuid_or_empty,
                                const std::string& detail) {
    ResponseEnvelope env;
    env.workload_uuid = uuid_or_empty;
    env.set_extra("proxy_error", detail);
    return {status, protocol::encode_response(env)};
}

}  // namespace

ForwardResult forward(const RequestEnvelope& env, const std::string& target_uri,
                      std::int64_t timeout_ms, const std::vector<std::string>& allowed_hosts) {
    auto uri = protocol::parse_uri(target_uri);
    if (!uri) return FailureKind::ConnectFailure;
    if (!host_allowed(uri->host, allowed_hosts)) return FailureKind::HostNotAllowed;

    httplib::Client client(uri->host, uri->port);
    client.set_connection_timeout(std::chrono::milliseconds(timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(timeout_ms));

    auto result = client.Post(uri->path, protocol::encode_request(env), "application/json");
    if (!result) {
        switch (result.error()) {
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::Connection:
                return FailureKind::ConnectFailure;
            case httplib::Error::Read:
            case httplib::Error::Write:
                return FailureKind::TimeoutFailure;
            default:
                return FailureKind::ConnectFailure;
        }
    }

    TargetReply reply;
    reply.http_status = result->status;
    std::string status_line =
        "HTTP/1.1 " + std::to_string(result->status) + " " + result->reason;
    reply.header_block = metrics::build_header_block(status_line, http::header_list(result->headers));
    reply.body = result->body;
    return reply;
}

InvocationOutcome handle_invocation(const std::string& raw_body, const ProxyConfig& config) {
    RequestEnvelope request;
    try {
        request = protocol::decode_request(raw_body);  // step 5
    } catch (const protocol::CodecError&) {
        return error_outcome(400, "", "malformed request");
    }

    auto uri = protocol::parse_uri(request.target_uri);
    if (!uri) {
        return error_outcome(400, request.workload_uuid, "bad target uri");
    }

    // m2: the re-encoded forward, measured before sending.
    std::string forward_body = protocol::encode_request(request);
    auto m2 = metrics::measure_http_sizes(request_header_block(*uri, forward_body.size()),
                                          forward_body, metrics::MeasurePoint::M2);

    std::int64_t proxy_start = metrics::epoch_now_ms();  // step 6
    auto start_mark = metrics::Clock::now();

    if (config.injected_latency_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(config.injected_latency_ms));
    }

    auto result = forward(request, request.target_uri, config.forward_timeout_ms,
                          config.allowed_target_hosts);  // step 7

    auto stop_mark = metrics::Clock::now();  // step 10
    std::int64_t proxy_stop = metrics::epoch_now_ms();

    auto stamp_proxy = [&](ResponseEnvelope& env) {
        // A reply already carrying a uuid echo is preserved so the driver
        // can detect the mismatch and mark the workload invalid.
        if (!env.workload_uuid) env.workload_uuid = request.workload_uuid;
        env.proxy_start_time = proxy_start;
        env.proxy_stop_time = proxy_stop;
        env.proxy_run_time = metrics::hr_elapsed(start_mark, stop_mark);
        env.set_extra("proxy_m2_header_b", std::to_string(m2.header_bytes));
        env.set_extra("proxy_m2_body_b", std::to_string(m2.body_bytes));
    };

    if (const auto* failure = std::get_if<FailureKind>(&result)) {
        int status;
        const char* detail;
        switch (*failure) {
            case FailureKind::HostNotAllowed:
                status = 403;
                detail = "target host not allowed";
                break;
            case FailureKind::TimeoutFailure:
                status = 504;
                detail = "gateway timeout";
                break;
            case FailureKind::ConnectFailure:
            default:
                status = 502;
                detail = "target unreachable";
                break;
        }
        ResponseEnvelope env;
        stamp_proxy(env);
        env.set_extra("proxy_error", detail);
        return {status, protocol::encode_response(env)};
    }

    const auto& reply = std::get<TargetReply>(result);  // step 9
    auto m3 = metrics::measure_http_sizes(reply.header_block, reply.body,
                                          metrics::MeasurePoint::M3);

    ResponseEnvelope merged;
    try {
        merged = protocol::decode_response(reply.body, protocol::ReplyKind::Target);
    } catch (const protocol::CodecError&) {
        ResponseEnvelope env;
        stamp_proxy(env);
        env.set_extra("proxy_error", "bad target reply");
        return {502, protocol::encode_response(env)};
    }

    // Step 11: target fields pass through unmodified, proxy fields added.
    stamp_proxy(merged);
    merged.set_extra("proxy_m3_header_b", std::to_string(m3.header_bytes));
    merged.set_extra("proxy_m3_body_b", std::to_string(m3.body_bytes));

    int status = reply.http_status == 200 ? 200 : reply.http_status;
    return {status, protocol::encode_response(merged)};  // step 12
}

ProxyServer::ProxyServer(ProxyConfig config) : config_(std::move(config)) {
    // Single logical route; any POST path is the invocation endpoint.
    server_.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
        auto outcome = handle_invocation(req.body, config_);
        res.status = outcome.http_status;
        res.set_content(outcome.body, "application/json");
    });
}

ProxyServer::~ProxyServer() { stop(); }

int ProxyServer::start(int port) { return runner_.start(server_, config_.listen_host, port); }

void ProxyServer::stop() { runner_.stop(); }

std::string ProxyServer::uri() const {
    return "http://" + config_.listen_host + ":" + std::to_string(runner_.port()) + "/invoke";
}

}  // namespace faasbench::proxy
