#include "faasbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "faasbench/http.hpp"
#include "faasbench/proxy.hpp"

namespace faasbench::bench {

namespace {

using metrics::InvocationRecord;
using metrics::Status;
using protocol::RequestEnvelope;
using protocol::ResponseEnvelope;
using workload::PlannedInvocation;
using workload::WorkloadPlan;

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

std::optional<std::int64_t> extra_int(const ResponseEnvelope& env, std::string_view name) {
    const std::string* raw = env.find_extra(name);
    if (!raw) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), v);
    if (ec != std::errc() || ptr != raw->data() + raw->size()) return std::nullopt;
    return v;
}

std::string error_detail_of(const ResponseEnvelope& env) {
    for (const char* field : {"proxy_error", "target_gateway_error", "target_error"}) {
        if (const std::string* v = env.find_extra(field)) return *v;
    }
    return {};
}

InvocationRecord invoke_once(const RunConfig& config, const protocol::Uri& proxy_uri,
                             const PlannedInvocation& planned) {
    RequestEnvelope env = planned.envelope;
    for (const auto& [k, v] : config.target_extras) env.set_extra(k, v);

    InvocationRecord record;
    record.uuid = env.workload_uuid;
    record.words = planned.word_count;

    std::string body = protocol::encode_request(env);
    record.sizes[0] = metrics::measure_http_sizes(request_header_block(proxy_uri, body.size()),
                                                  body, metrics::MeasurePoint::M1);

    httplib::Client client(proxy_uri.host, proxy_uri.port);
    client.set_connection_timeout(std::chrono::milliseconds(config.request_timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(config.request_timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(config.request_timeout_ms));

    metrics::TimingSample client_timing;
    client_timing.epoch_start_ms = metrics::epoch_now_ms();  // step 3
    auto start_mark = metrics::Clock::now();

    auto result = client.Post(proxy_uri.path, body, "application/json");  // step 4

    auto stop_mark = metrics::Clock::now();  // step 13
    client_timing.epoch_stop_ms = metrics::epoch_now_ms();
    client_timing.hr_elapsed = metrics::hr_elapsed(start_mark, stop_mark);
    record.client_timing = client_timing;

    if (!result) {
        record.status = Status::TransportError;
        record.error_detail = httplib::to_string(result.error());
        return record;
    }

    std::string status_line = "HTTP/1.1 " + std::to_string(result->status) + " " + result->reason;
    record.sizes[3] = metrics::measure_http_sizes(
        metrics::build_header_block(status_line, http::header_list(result->headers)),
        result->body, metrics::MeasurePoint::M4);

    ResponseEnvelope resp;
    try {
        resp = protocol::decode_response(result->body, protocol::ReplyKind::Proxy);
    } catch (const protocol::CodecError& e) {
        record.status = Status::FunctionError;
        record.error_detail = std::string("undecodable response: ") + e.what();
        return record;
    }

    record.status = metrics::classify(resp, env);
    record.error_detail = error_detail_of(resp);
    if (resp.workload_result) record.result = *resp.workload_result;

    if (resp.proxy_start_time && resp.proxy_stop_time && resp.proxy_run_time) {
        record.proxy_timing =
            metrics::TimingSample{*resp.proxy_start_time, *resp.proxy_stop_time, *resp.proxy_run_time};
    }
    if (resp.target_start_time && resp.target_stop_time && resp.target_run_time) {
        record.target_timing = metrics::TimingSample{*resp.target_start_time,
                                                     *resp.target_stop_time, *resp.target_run_time};
    }

    auto size_from_extras = [&](std::string_view h, std::string_view b, metrics::MeasurePoint p)
        -> std::optional<metrics::SizeSample> {
        auto header = extra_int(resp, h);
        auto body_b = extra_int(resp, b);
        if (!header || !body_b) return std::nullopt;
        return metrics::SizeSample{p, static_cast<std::uint64_t>(*header),
                                   static_cast<std::uint64_t>(*body_b)};
    };
    record.sizes[1] = size_from_extras("proxy_m2_header_b", "proxy_m2_body_b",
                                       metrics::MeasurePoint::M2);
    record.sizes[2] = size_from_extras("proxy_m3_header_b", "proxy_m3_body_b",
                                       metrics::MeasurePoint::M3);
    return record;
}

void preflight(const RunConfig& config, const protocol::Uri& proxy_uri) {
    RequestEnvelope env;
    env.workload_uuid = kPreflightUuid;
    env.target_uri = config.target_uri;
    env.workload_data = "";

    httplib::Client client(proxy_uri.host, proxy_uri.port);
    client.set_connection_timeout(std::chrono::seconds(2));
    client.set_read_timeout(std::chrono::milliseconds(config.request_timeout_ms));
    auto result = client.Post(proxy_uri.path, protocol::encode_request(env), "application/json");
    if (!result) {
        throw BenchError(BenchError::Kind::ProxyUnreachable,
                         "proxy preflight failed: " + httplib::to_string(result.error()));
    }
}

WorkloadPlan build_plan(const RunConfig& config) {
    return std::visit(
        [&](const auto& spec) -> WorkloadPlan {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, workload::BatchSpec>) {
                return workload::plan_batch(spec, config.target_uri);
            } else if constexpr (std::is_same_v<T, workload::BackoffSpec>) {
                return workload::plan_backoff(spec, config.target_uri);
            } else {
                return workload::plan_timeout_probe(spec, config.target_uri);
            }
        },
        config.operation);
}

void dispatch_plan(const RunConfig& config, const protocol::Uri& proxy_uri,
                   const WorkloadPlan& plan, metrics::RecordStore& store,
                   metrics::RunLog& log) {
    auto run_start = metrics::Clock::now();
    auto wait_until_offset = [&](std::int64_t offset_ms) {
        std::this_thread::sleep_until(run_start + std::chrono::milliseconds(offset_ms));
    };
    auto record_one = [&](const PlannedInvocation& inv) {
        InvocationRecord record = invoke_once(config, proxy_uri, inv);
        std::string line = "invocation " + record.uuid + " status=" +
                           std::string(metrics::status_name(record.status));
        if (record.error_detail.empty()) {
            log.info(line);
        } else {
            log.error(line + " detail=" + record.error_detail);
        }
        store.append(std::move(record));
    };

    if (plan.dispatch_mode == workload::DispatchMode::Synchronous) {
        for (const auto& inv : plan.invocations) {
            wait_until_offset(inv.fire_offset_ms);
            record_one(inv);
        }
        return;
    }

    // Asynchronous: batches run one after another, each drained by up to
    // max_in_flight workers pulling from a shared index.
    std::size_t batch = std::max<std::size_t>(1, plan.batch_size);
    for (std::size_t begin = 0; begin < plan.invocations.size(); begin += batch) {
        std::size_t end = std::min(begin + batch, plan.invocations.size());
        std::atomic<std::size_t> next{begin};
        std::size_t workers =
            std::min<std::size_t>(plan.max_in_flight, end - begin);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= end) break;
                    record_one(plan.invocations[i]);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
}

}  // namespace

RunResult run_plan(const RunConfig& config, const WorkloadPlan& plan) {
    auto proxy_uri = protocol::parse_uri(config.proxy_uri);
    if (!proxy_uri) {
        throw BenchError(BenchError::Kind::Config, "proxy_uri is not absolute: " + config.proxy_uri);
    }
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) {
        throw BenchError(BenchError::Kind::Io, "cannot create output dir: " + config.output_dir);
    }

    RunResult out;
    out.csv_path = (std::filesystem::path(config.output_dir) / "run.csv").string();
    out.log_path = (std::filesystem::path(config.output_dir) / "run.log").string();

    metrics::RunLog log(out.log_path);
    log.info("run start: " + std::to_string(plan.invocations.size()) + " planned invocations");

    preflight(config, *proxy_uri);

    metrics::RecordStore store;
    dispatch_plan(config, *proxy_uri, plan, store, log);

    out.records = store.snapshot();
    out.summary = metrics::summarize(out.records);  // step 14
    metrics::write_csv(out.records, out.csv_path);  // step 15
    log.info("run stop: " + std::to_string(out.records.size()) + " records written");
    return out;  // step 16
}

RunResult run_benchmark(const RunConfig& config) {
    return run_plan(config, build_plan(config));
}

metrics::RunSummary report(const std::string& csv_path) {
    return metrics::summarize(metrics::read_csv(csv_path));
}

std::string render_summary(const metrics::RunSummary& summary) {
    std::ostringstream out;
    out << "requests:       " << summary.request_count << "\n";
    out << "successes:      " << summary.success_count << "\n";
    char ratio[32];
    std::snprintf(ratio, sizeof(ratio), "%.4f", summary.success_ratio);
    out << "success_ratio:  " << ratio << "\n";
    out << "total_runtime:  " << summary.total_runtime_ms << " ms\n\n";

    auto layer_row = [&](const char* name, const std::optional<metrics::LayerStats>& s) {
        if (!s) return;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "%-8s min=%.3f max=%.3f mean=%.3f median=%.3f p95=%.3f p99=%.3f stddev=%.3f\n",
                      name, s->min_ms, s->max_ms, s->mean_ms, s->median_ms, s->p95_ms, s->p99_ms,
                      s->stddev_ms);
        out << buf;
    };
    out << "durations (ms, successes only):\n";
    layer_row("client", summary.client);
    layer_row("proxy", summary.proxy);
    layer_row("target", summary.target);

    out << "\nbyte totals per measurement point:\n";
    static constexpr const char* kPoints[] = {"m1", "m2", "m3", "m4"};
    for (int i = 0; i < 4; ++i) {
        char buf[100];
        std::snprintf(buf, sizeof(buf), "%-4s header=%llu body=%llu\n", kPoints[i],
                      static_cast<unsigned long long>(summary.total_header_bytes[i]),
                      static_cast<unsigned long long>(summary.total_body_bytes[i]));
        out << buf;
    }
    return out.str();
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw BenchError(BenchError::Kind::Config, "cannot open config: " + path);
    }
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw BenchError(BenchError::Kind::Config, "bad config line: " + line);
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        kv[key] = value;
    }

    auto get_int = [&](const char* key, std::int64_t fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            return static_cast<std::int64_t>(std::stoll(it->second));
        } catch (const std::exception&) {
            throw BenchError(BenchError::Kind::Config, std::string("bad integer for ") + key);
        }
    };
    auto get_bool = [&](const char* key) {
        auto it = kv.find(key);
        return it != kv.end() && (it->second == "true" || it->second == "1");
    };

    RunConfig config;
    config.proxy_uri = kv.count("proxy_uri") ? kv["proxy_uri"] : "";
    config.target_uri = kv.count("target_uri") ? kv["target_uri"] : "";
    config.output_dir = kv.count("out_dir") ? kv["out_dir"] : ".";
    config.request_timeout_ms = get_int("request_timeout_ms", 30'000);
    if (kv.count("mode")) {
        config.target_extras.emplace_back("faasbench_mode", kv["mode"]);
    }

    std::string op = kv.count("operation") ? kv["operation"] : "batch";
    if (op == "batch") {
        workload::BatchSpec spec;
        spec.total_requests = static_cast<std::uint64_t>(get_int("requests", 1));
        spec.batch_size = static_cast<std::uint64_t>(get_int("batch", spec.total_requests));
        spec.dispatch_mode = get_bool("async") ? workload::DispatchMode::Asynchronous
                                               : workload::DispatchMode::Synchronous;
        spec.max_in_flight = static_cast<std::uint64_t>(get_int("max_in_flight", 1));
        spec.words_per_request = static_cast<std::uint64_t>(get_int("words", 0));
        spec.seed = static_cast<std::uint64_t>(get_int("seed", 0));
        config.operation = spec;
    } else if (op == "backoff") {
        workload::BackoffSpec spec;
        spec.initial_wait_ms = get_int("initial_wait_ms", 100);
        spec.multiplier = kv.count("multiplier") ? std::stod(kv["multiplier"]) : 2.0;
        spec.steps = static_cast<std::uint64_t>(get_int("steps", 8));
        spec.words_per_request = static_cast<std::uint64_t>(get_int("words", 0));
        spec.seed = static_cast<std::uint64_t>(get_int("seed", 0));
        config.operation = spec;
    } else if (op == "timeout") {
        workload::TimeoutSpec spec;
        spec.requested_sleep_ms = get_int("sleep_ms", 0);
        spec.expected_limit_ms = get_int("limit_ms", 0);
        config.operation = spec;
    } else {
        throw BenchError(BenchError::Kind::Config, "unknown operation: " + op);
    }
    return config;
}

}  // namespace faasbench::bench
