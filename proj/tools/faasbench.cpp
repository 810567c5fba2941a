#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "faasbench/bench.hpp"
#include "faasbench/proxy.hpp"
#include "faasbench/targets.hpp"

namespace {

// 0 = success, 1 = infrastructure failure, 2 = user error
constexpr int kExitOk = 0;
constexpr int kExitInfra = 1;
constexpr int kExitUser = 2;

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

void wait_for_signal() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

struct RunFlags {
    std::string config_file;
    std::string proxy_uri, target_uri, out_dir;
    std::optional<std::int64_t> words, requests, batch, max_in_flight, sleep_ms, limit_ms;
    bool async = false;
    // gateway settings for the self-hosted servers
    std::int64_t cold_start_ms = 0, warm_window_ms = 60'000;
    bool header_echo = false;
    bool self_hosted = false;
};

int do_run(const RunFlags& flags) {
    faasbench::bench::RunConfig config;
    if (!flags.config_file.empty()) {
        config = faasbench::bench::load_config(flags.config_file);
    }
    if (!flags.proxy_uri.empty()) config.proxy_uri = flags.proxy_uri;
    if (!flags.target_uri.empty()) config.target_uri = flags.target_uri;
    if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;

    auto override_batch = [&](faasbench::workload::BatchSpec& spec) {
        if (flags.words) spec.words_per_request = static_cast<std::uint64_t>(*flags.words);
        if (flags.requests) {
            spec.total_requests = static_cast<std::uint64_t>(*flags.requests);
            if (spec.batch_size > spec.total_requests) spec.batch_size = spec.total_requests;
        }
        if (flags.batch) spec.batch_size = static_cast<std::uint64_t>(*flags.batch);
        if (flags.async) spec.dispatch_mode = faasbench::workload::DispatchMode::Asynchronous;
        if (flags.max_in_flight) {
            spec.max_in_flight = static_cast<std::uint64_t>(*flags.max_in_flight);
        }
    };
    if (flags.sleep_ms) {
        faasbench::workload::TimeoutSpec spec;
        spec.requested_sleep_ms = *flags.sleep_ms;
        spec.expected_limit_ms = flags.limit_ms.value_or(0);
        config.operation = spec;
    } else if (auto* spec = std::get_if<faasbench::workload::BatchSpec>(&config.operation)) {
        override_batch(*spec);
    }

    // Self-contained run: spin up a local proxy and gateway-emulated target.
    std::optional<faasbench::targets::TargetServer> target;
    std::optional<faasbench::proxy::ProxyServer> proxy;
    if (flags.self_hosted || config.proxy_uri.empty()) {
        faasbench::targets::GatewayConfig gateway;
        if (flags.limit_ms) gateway.execution_limit_ms = *flags.limit_ms;
        gateway.cold_start_delay_ms = flags.cold_start_ms;
        gateway.warm_window_ms = flags.warm_window_ms;
        gateway.header_echo = flags.header_echo;
        target.emplace(gateway);
        target->start();
        proxy.emplace();
        proxy->start();
        config.proxy_uri = proxy->uri();
        bool sleeper = std::holds_alternative<faasbench::workload::TimeoutSpec>(config.operation);
        config.target_uri = target->uri(sleeper ? "/func/sleep" : "/func/word");
    }
    if (config.proxy_uri.empty() || config.target_uri.empty()) {
        std::cerr << "error: proxy_uri and target_uri are required (or use --self-hosted)\n";
        return kExitUser;
    }

    auto result = faasbench::bench::run_benchmark(config);
    std::cout << faasbench::bench::render_summary(result.summary);
    std::cout << "\ncsv: " << result.csv_path << "\nlog: " << result.log_path << "\n";
    return kExitOk;
}

int do_report(const std::string& csv_path) {
    try {
        auto summary = faasbench::bench::report(csv_path);
        std::cout << faasbench::bench::render_summary(summary);
    } catch (const faasbench::metrics::MetricsError& e) {
        using Kind = faasbench::metrics::MetricsError::Kind;
        if (e.kind() == Kind::EmptyRun || e.kind() == Kind::Schema) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitUser;
        }
        throw;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FaaS benchmarking toolkit: driver, proxy, targets, reporting"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run = app.add_subcommand("run", "Execute a benchmark run");
    run->add_option("config", flags.config_file, "Properties-style config file");
    run->add_option("--proxy-uri", flags.proxy_uri);
    run->add_option("--target-uri", flags.target_uri);
    run->add_option("--out", flags.out_dir, "Output directory for run.csv / run.log");
    run->add_option("--words", flags.words, "Words per request");
    run->add_option("--requests", flags.requests, "Total requests");
    run->add_option("--batch", flags.batch, "Batch size");
    run->add_flag("--async", flags.async, "Asynchronous dispatch");
    run->add_option("--max-in-flight", flags.max_in_flight);
    run->add_option("--sleep-ms", flags.sleep_ms, "Timeout probe: requested sleep");
    run->add_option("--limit-ms", flags.limit_ms, "Gateway execution limit");
    run->add_option("--cold-start-ms", flags.cold_start_ms);
    run->add_option("--warm-window-ms", flags.warm_window_ms);
    run->add_flag("--header-echo", flags.header_echo);
    run->add_flag("--self-hosted", flags.self_hosted,
                  "Launch a local proxy and target for this run");

    int proxy_port = 8080;
    std::int64_t forward_timeout_ms = 30'000, injected_latency_ms = 0;
    std::vector<std::string> allowed_hosts;
    auto* serve_proxy = app.add_subcommand("serve-proxy", "Run the proxy function service");
    serve_proxy->add_option("--port", proxy_port);
    serve_proxy->add_option("--forward-timeout-ms", forward_timeout_ms);
    serve_proxy->add_option("--injected-latency-ms", injected_latency_ms);
    serve_proxy->add_option("--allow-host", allowed_hosts, "Target host allow-list entry");

    int target_port = 8081;
    std::int64_t limit_ms = 30'000, cold_ms = 0, warm_ms = 60'000;
    bool echo = false;
    auto* serve_target = app.add_subcommand("serve-target", "Run the target function service");
    serve_target->add_option("--port", target_port);
    serve_target->add_option("--limit-ms", limit_ms, "Gateway execution limit");
    serve_target->add_option("--cold-start-ms", cold_ms);
    serve_target->add_option("--warm-window-ms", warm_ms);
    serve_target->add_flag("--header-echo", echo);

    std::string csv_path;
    auto* report = app.add_subcommand("report", "Recompute a summary from a run CSV");
    report->add_option("csv", csv_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(flags);
        if (serve_proxy->parsed()) {
            faasbench::proxy::ProxyConfig config;
            config.listen_host = "0.0.0.0";
            config.forward_timeout_ms = forward_timeout_ms;
            config.injected_latency_ms = injected_latency_ms;
            config.allowed_target_hosts = allowed_hosts;
            faasbench::proxy::ProxyServer server(config);
            int port = server.start(proxy_port);
            std::cout << "proxy listening on :" << port << "\n";
            wait_for_signal();
            return kExitOk;
        }
        if (serve_target->parsed()) {
            faasbench::targets::GatewayConfig gateway{limit_ms, cold_ms, warm_ms, echo};
            faasbench::targets::TargetServer server(gateway);
            int port = server.start("0.0.0.0", target_port);
            std::cout << "target listening on :" << port << " (/func/word, /func/sleep)\n";
            wait_for_signal();
            return kExitOk;
        }
        if (report->parsed()) return do_report(csv_path);
    } catch (const faasbench::bench::BenchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == faasbench::bench::BenchError::Kind::Config ? kExitUser : kExitInfra;
    } catch (const faasbench::http::ServerError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfra;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfra;
    }
    return kExitUser;
}
