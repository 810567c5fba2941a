#include <doctest.h>

#include <chrono>

#include "faasbench/http.hpp"
#include "faasbench/metrics.hpp"
#include "faasbench/proxy.hpp"
#include "faasbench/targets.hpp"
#include "faasbench/workload.hpp"

using namespace faasbench;
using protocol::RequestEnvelope;
using protocol::ResponseEnvelope;

namespace {

std::string body_for(const std::string& target_uri, const std::string& data,
                     const protocol::FieldList& extra = {}) {
    RequestEnvelope env{"112c338d", target_uri, data, extra};
    return protocol::encode_request(env);
}

}  // namespace

TEST_CASE("proxy forwards to the word target and nests timings") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyConfig config;

    auto outcome = proxy::handle_invocation(body_for(target.uri("/func/word"), "F a a S"), config);
    CHECK(outcome.http_status == 200);
    auto env = protocol::decode_response(outcome.body);
    CHECK(*env.workload_uuid == "112c338d");
    CHECK(*env.workload_result == "4");
    REQUIRE(env.proxy_run_time.has_value());
    REQUIRE(env.target_run_time.has_value());
    CHECK(env.proxy_run_time->total_nanoseconds() >= env.target_run_time->total_nanoseconds());
    CHECK(*env.proxy_stop_time >= *env.proxy_start_time);
}

TEST_CASE("proxy and target share the host time base") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyConfig config;
    auto outcome = proxy::handle_invocation(body_for(target.uri("/func/word"), "x"), config);
    auto env = protocol::decode_response(outcome.body);
    std::int64_t skew = std::abs(*env.target_start_time - *env.proxy_start_time);
    std::int64_t round_trip_ms =
        static_cast<std::int64_t>(env.proxy_run_time->milliseconds()) + 1;
    CHECK(skew <= round_trip_ms);
}

TEST_CASE("target-origin fields pass through unmodified") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyConfig config;
    auto direct = proxy::forward(
        protocol::decode_request(body_for(target.uri("/func/word"), "a b")),
        target.uri("/func/word"), 5000);
    REQUIRE(std::holds_alternative<proxy::TargetReply>(direct));
    auto target_env = protocol::decode_response(std::get<proxy::TargetReply>(direct).body,
                                                protocol::ReplyKind::Target);

    auto outcome = proxy::handle_invocation(body_for(target.uri("/func/word"), "a b"), config);
    auto merged = protocol::decode_response(outcome.body);
    CHECK(*merged.workload_result == *target_env.workload_result);
    CHECK(merged.target_run_time.has_value());
}

TEST_CASE("m2 sizes are reported and cover the payload") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyConfig config;
    auto payload = workload::synthesize_words(10'000, 3);
    auto outcome = proxy::handle_invocation(body_for(target.uri("/func/word"), payload), config);
    auto env = protocol::decode_response(outcome.body);
    REQUIRE(env.find_extra("proxy_m2_body_b") != nullptr);
    CHECK(std::stoull(*env.find_extra("proxy_m2_body_b")) >= payload.size());
    REQUIRE(env.find_extra("proxy_m3_header_b") != nullptr);
    CHECK(std::stoull(*env.find_extra("proxy_m3_header_b")) > 0);
}

TEST_CASE("malformed request body yields 400 with proxy_error") {
    proxy::ProxyConfig config;
    auto outcome = proxy::handle_invocation("{nope", config);
    CHECK(outcome.http_status == 400);
    auto env = protocol::decode_response(outcome.body);
    REQUIRE(env.find_extra("proxy_error") != nullptr);
    CHECK(*env.find_extra("proxy_error") == "malformed request");
}

TEST_CASE("unreachable target yields 502 with the uuid echoed") {
    proxy::ProxyConfig config;
    config.forward_timeout_ms = 1000;
    auto outcome =
        proxy::handle_invocation(body_for("http://127.0.0.1:1/func/word", "x"), config);
    CHECK(outcome.http_status == 502);
    auto env = protocol::decode_response(outcome.body);
    CHECK(*env.workload_uuid == "112c338d");
    REQUIRE(env.find_extra("proxy_error") != nullptr);
    CHECK(*env.find_extra("proxy_error") == "target unreachable");
    // classified as FunctionError at the driver, not TransportError
    RequestEnvelope req{"112c338d", "http://127.0.0.1:1/func/word", "x", {}};
    CHECK(metrics::classify(env, req) == metrics::Status::FunctionError);
}

TEST_CASE("allow-list admits only listed hosts") {
    targets::TargetServer target;
    target.start();
    auto env = protocol::decode_request(body_for(target.uri("/func/word"), "x"));

    auto hit = proxy::forward(env, target.uri("/func/word"), 5000, {"127.0.0.1"});
    CHECK(std::holds_alternative<proxy::TargetReply>(hit));

    auto miss = proxy::forward(env, target.uri("/func/word"), 5000, {"faas"});
    REQUIRE(std::holds_alternative<proxy::FailureKind>(miss));
    CHECK(std::get<proxy::FailureKind>(miss) == proxy::FailureKind::HostNotAllowed);
}

TEST_CASE("forward times out on a slow target") {
    targets::TargetServer target;  // default 30 s execution limit
    target.start();
    auto env = protocol::decode_request(
        body_for(target.uri("/func/sleep"), "", {{"faasbench_sleep_ms", "2000"}}));
    auto t0 = metrics::Clock::now();
    auto result = proxy::forward(env, target.uri("/func/sleep"), 500);
    auto elapsed = metrics::hr_elapsed(t0, metrics::Clock::now()).milliseconds();
    REQUIRE(std::holds_alternative<proxy::FailureKind>(result));
    CHECK(std::get<proxy::FailureKind>(result) == proxy::FailureKind::TimeoutFailure);
    CHECK(elapsed >= 500.0 * 0.8);
    CHECK(elapsed <= 500.0 * 1.2 + 100.0);
}

TEST_CASE("forward timeout surfaces as gateway timeout status") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyConfig config;
    config.forward_timeout_ms = 300;
    auto outcome = proxy::handle_invocation(
        body_for(target.uri("/func/sleep"), "", {{"faasbench_sleep_ms", "2000"}}), config);
    CHECK(outcome.http_status == 504);
    auto env = protocol::decode_response(outcome.body);
    REQUIRE(env.find_extra("proxy_error") != nullptr);
    CHECK(*env.find_extra("proxy_error") == "gateway timeout");
    RequestEnvelope req{"112c338d", target.uri("/func/sleep"), "", {}};
    CHECK(metrics::classify(env, req) == metrics::Status::GatewayTimeout);
}

TEST_CASE("injected latency stretches the proxy-side duration") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyConfig plain;
    proxy::ProxyConfig remote;
    remote.injected_latency_ms = 200;
    auto body = body_for(target.uri("/func/word"), "x");
    auto near_env = protocol::decode_response(proxy::handle_invocation(body, plain).body);
    auto far_env = protocol::decode_response(proxy::handle_invocation(body, remote).body);
    CHECK(far_env.proxy_run_time->milliseconds() >=
          near_env.proxy_run_time->milliseconds() + 150.0);
}

TEST_CASE("responses are stateless apart from timing fields") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyConfig config;
    auto body = body_for(target.uri("/func/word"), "a b c");
    auto first = protocol::decode_response(proxy::handle_invocation(body, config).body);
    auto second = protocol::decode_response(proxy::handle_invocation(body, config).body);
    CHECK(first.workload_uuid == second.workload_uuid);
    CHECK(first.workload_result == second.workload_result);
    auto strip = [](ResponseEnvelope env) {
        env.target_start_time.reset();
        env.target_stop_time.reset();
        env.target_run_time.reset();
        env.proxy_start_time.reset();
        env.proxy_stop_time.reset();
        env.proxy_run_time.reset();
        // m3 header can shift by a digit when sizes change magnitude
        return env;
    };
    auto a = strip(first);
    auto b = strip(second);
    CHECK(a.workload_result == b.workload_result);
    CHECK(a.workload_uuid == b.workload_uuid);
}

TEST_CASE("proxy server serves the pipeline over http") {
    targets::TargetServer target;
    target.start();
    proxy::ProxyServer server;
    server.start();

    httplib::Client client("127.0.0.1", server.port());
    auto res = client.Post("/invoke", body_for(target.uri("/func/word"), "F a a S"),
                           "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto env = protocol::decode_response(res->body);
    CHECK(*env.workload_result == "4");
}
