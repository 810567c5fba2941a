// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold inside their runtime budgets.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "faasbench/bench.hpp"
#include "faasbench/metrics.hpp"
#include "faasbench/protocol.hpp"
#include "faasbench/proxy.hpp"
#include "faasbench/targets.hpp"
#include "faasbench/workload.hpp"
#include "test_support.hpp"

using namespace faasbench;

namespace {

int g_failures = 0;

#define REQUIRE_THAT(cond)                                              \
    do {                                                                \
        if (!(cond)) {                                                  \
            detail = "assertion failed: " #cond;                        \
            return false;                                               \
        }                                                               \
    } while (0)

void criterion(int number, const char* name, double budget_s,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && elapsed >= budget_s) {
        ok = false;
        detail = "runtime budget exceeded";
    }
    if (ok) {
        std::printf("PASS criterion %d: %s (%.2fs)\n", number, name, elapsed);
    } else {
        std::printf("FAIL criterion %d: %s (%.2fs) %s\n", number, name, elapsed, detail.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

std::string read_fixture(const char* name) {
    std::ifstream in(std::string(FAASBENCH_FIXTURE_DIR) + "/" + name, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string temp_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir.string();
}

std::uint64_t oracle_word_count(const std::string& text) {
    std::uint64_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        if (i < text.size()) {
            ++count;
            while (i < text.size() && text[i] != ' ') ++i;
        }
    }
    return count;
}

std::uint64_t oracle_letter_count(const std::string& text) {
    std::uint64_t count = 0;
    for (char c : text) {
        if (c != ' ') ++count;
    }
    return count;
}

bench::RunResult ladder_run(bool header_echo, const char* out_name,
                            std::vector<std::string>& payloads) {
    targets::GatewayConfig gateway;
    gateway.header_echo = header_echo;
    targets::TargetServer target(gateway);
    target.start();
    proxy::ProxyServer proxy_server;
    proxy_server.start();

    bench::RunConfig config;
    config.proxy_uri = proxy_server.uri();
    config.target_uri = target.uri("/func/word");
    config.output_dir = temp_dir(out_name);

    workload::WorkloadPlan plan;
    std::mt19937_64 rng(11);
    payloads.clear();
    for (std::uint64_t words : {10ull, 100ull, 1'000ull, 10'000ull}) {
        workload::PlannedInvocation inv;
        inv.envelope.workload_uuid = protocol::make_uuid(rng(), rng());
        inv.envelope.target_uri = config.target_uri;
        inv.envelope.workload_data = workload::synthesize_words(words, words);
        inv.word_count = words;
        payloads.push_back(inv.envelope.workload_data);
        plan.invocations.push_back(std::move(inv));
    }
    return bench::run_plan(config, plan);
}

bool check_protocol_fidelity(std::string& detail) {
    auto req = protocol::decode_request(read_fixture("request.json"));
    REQUIRE_THAT(req.workload_uuid == "112c338d");
    REQUIRE_THAT(req.target_uri == "https://faas:8080/func/word");
    REQUIRE_THAT(req.workload_data == "F a a S");
    REQUIRE_THAT(req.extra.empty());
    REQUIRE_THAT(protocol::decode_request(protocol::encode_request(req)) == req);

    auto resp = protocol::decode_response(read_fixture("response.json"));
    REQUIRE_THAT(resp.workload_uuid == "112c338d");
    REQUIRE_THAT(*resp.target_start_time == 1533675892375);
    REQUIRE_THAT(*resp.target_stop_time == 1533675892401);
    REQUIRE_THAT((*resp.target_run_time == protocol::HrDuration{0, 26250589}));
    REQUIRE_THAT(*resp.workload_result == "4");
    REQUIRE_THAT(protocol::decode_response(protocol::encode_response(resp)) == resp);
    return true;
}

bool check_end_to_end(std::string& detail) {
    targets::TargetServer target;
    target.start();
    proxy::ProxyServer proxy_server;
    proxy_server.start();

    bench::RunConfig config;
    config.proxy_uri = proxy_server.uri();
    config.target_uri = target.uri("/func/word");
    config.output_dir = temp_dir("faasbench_acc2");

    workload::WorkloadPlan plan;
    workload::PlannedInvocation inv;
    inv.envelope.workload_uuid = "112c338d";
    inv.envelope.target_uri = config.target_uri;
    inv.envelope.workload_data = "F a a S";
    inv.word_count = 4;
    plan.invocations.push_back(std::move(inv));

    auto result = bench::run_plan(config, plan);
    REQUIRE_THAT(result.records.size() == 1);
    const auto& r = result.records[0];
    REQUIRE_THAT(r.status == metrics::Status::Success);
    REQUIRE_THAT(r.result == "4");
    REQUIRE_THAT(r.target_timing && r.proxy_timing && r.client_timing);
    REQUIRE_THAT(r.target_timing->hr_elapsed.total_nanoseconds() <=
                 r.proxy_timing->hr_elapsed.total_nanoseconds());
    REQUIRE_THAT(r.proxy_timing->hr_elapsed.total_nanoseconds() <=
                 r.client_timing->hr_elapsed.total_nanoseconds());
    return true;
}

bool check_header_growth(std::string& detail) {
    std::vector<std::string> payloads;
    auto echoed = ladder_run(true, "faasbench_acc3_on", payloads);
    REQUIRE_THAT(echoed.records.size() == 4);
    std::uint64_t prev_header = 0;
    std::uint64_t body_min = UINT64_MAX, body_max = 0;
    for (std::size_t i = 0; i < echoed.records.size(); ++i) {
        const auto& r = echoed.records[i];
        REQUIRE_THAT(r.status == metrics::Status::Success);
        REQUIRE_THAT(r.sizes[2].has_value());
        REQUIRE_THAT(r.sizes[2]->header_bytes > prev_header);
        REQUIRE_THAT(r.sizes[2]->header_bytes >= payloads[i].size());
        prev_header = r.sizes[2]->header_bytes;
        body_min = std::min(body_min, r.sizes[2]->body_bytes);
        body_max = std::max(body_max, r.sizes[2]->body_bytes);
    }
    REQUIRE_THAT(body_max - body_min <= 128);

    auto plain = ladder_run(false, "faasbench_acc3_off", payloads);
    std::uint64_t header_min = UINT64_MAX, header_max = 0;
    for (const auto& r : plain.records) {
        REQUIRE_THAT(r.sizes[2].has_value());
        header_min = std::min(header_min, r.sizes[2]->header_bytes);
        header_max = std::max(header_max, r.sizes[2]->header_bytes);
    }
    REQUIRE_THAT(header_max - header_min < 64);
    return true;
}

bool check_timeout_probe(std::string& detail) {
    targets::GatewayConfig gateway;
    gateway.execution_limit_ms = 1000;
    targets::TargetServer target(gateway);
    target.start();
    proxy::ProxyServer proxy_server;
    proxy_server.start();

    bench::RunConfig config;
    config.proxy_uri = proxy_server.uri();
    config.target_uri = target.uri("/func/sleep");
    config.output_dir = temp_dir("faasbench_acc4");

    workload::WorkloadPlan plan;
    std::mt19937_64 rng(17);
    for (std::int64_t sleep_ms : {500, 1000, 1500}) {
        workload::PlannedInvocation inv;
        inv.envelope.workload_uuid = protocol::make_uuid(rng(), rng());
        inv.envelope.target_uri = config.target_uri;
        inv.envelope.set_extra("faasbench_sleep_ms", std::to_string(sleep_ms));
        plan.invocations.push_back(std::move(inv));
    }
    auto result = bench::run_plan(config, plan);
    REQUIRE_THAT(result.records.size() == 3);
    REQUIRE_THAT(result.records[0].status == metrics::Status::Success);
    REQUIRE_THAT(result.records[1].status == metrics::Status::Success);
    REQUIRE_THAT(result.records[2].status == metrics::Status::GatewayTimeout);
    double timeout_latency = result.records[2].client_timing->hr_elapsed.milliseconds();
    REQUIRE_THAT(timeout_latency >= 1000.0);
    REQUIRE_THAT(timeout_latency <= 1300.0);
    return true;
}

bool check_cold_start(std::string& detail) {
    targets::GatewayConfig gateway;
    gateway.cold_start_delay_ms = 300;
    gateway.warm_window_ms = 1000;
    targets::TargetServer target(gateway);
    target.start();
    proxy::ProxyServer proxy_server;
    proxy_server.start();

    bench::RunConfig config;
    config.proxy_uri = proxy_server.uri();
    config.target_uri = target.uri("/func/word");
    config.output_dir = temp_dir("faasbench_acc5");

    workload::BackoffSpec spec;
    spec.initial_wait_ms = 100;
    spec.multiplier = 2.0;
    spec.steps = 5;  // gaps 100, 200, 400, 800, 1600
    spec.words_per_request = 5;
    config.operation = spec;

    auto result = bench::run_benchmark(config);
    REQUIRE_THAT(result.records.size() == 6);
    std::vector<std::int64_t> gaps = workload::backoff_gaps(spec);

    // warm median over the probes that stayed inside the warm window
    std::vector<double> warm;
    for (std::size_t i = 1; i <= 5; ++i) {
        if (gaps[i - 1] <= gateway.warm_window_ms) {
            warm.push_back(result.records[i].client_timing->hr_elapsed.milliseconds());
        }
    }
    std::sort(warm.begin(), warm.end());
    double warm_median = warm[(warm.size() - 1) / 2];
    double threshold = warm_median + 250.0;

    for (std::size_t i = 1; i <= 5; ++i) {
        double latency = result.records[i].client_timing->hr_elapsed.milliseconds();
        bool expect_cold = gaps[i - 1] > gateway.warm_window_ms;
        if (expect_cold) {
            REQUIRE_THAT(latency >= threshold);
        } else {
            REQUIRE_THAT(latency < threshold);
        }
    }
    return true;
}

bool check_concurrency_cap(std::string& detail) {
    testsupport::CountingTarget counting(20);
    counting.start();
    proxy::ProxyServer proxy_server;
    proxy_server.start();

    bench::RunConfig config;
    config.proxy_uri = proxy_server.uri();
    config.target_uri = counting.uri();
    config.output_dir = temp_dir("faasbench_acc6");

    workload::BatchSpec spec;
    spec.total_requests = 100;
    spec.batch_size = 100;
    spec.dispatch_mode = workload::DispatchMode::Asynchronous;
    spec.max_in_flight = 10;
    config.operation = spec;

    auto result = bench::run_benchmark(config);
    REQUIRE_THAT(result.records.size() == 100);
    REQUIRE_THAT(counting.peak() <= 10);
    REQUIRE_THAT(result.summary.success_ratio == 1.0);
    std::set<std::string> uuids;
    for (const auto& r : result.records) uuids.insert(r.uuid);
    REQUIRE_THAT(uuids.size() == 100);
    return true;
}

bool check_oracle_equivalence(std::string& detail) {
    std::mt19937_64 rng(23);

    // word/letter counters vs the brute-force tokenizer
    for (int i = 0; i < 10'000; ++i) {
        std::uniform_int_distribution<std::size_t> len(0, 60);
        std::uniform_int_distribution<int> pick(0, 3);
        std::string s(len(rng), ' ');
        for (auto& c : s) {
            int kind = pick(rng);
            c = kind == 0 ? ' ' : static_cast<char>('a' + rng() % 26);
        }
        REQUIRE_THAT(targets::count_words(s) == oracle_word_count(s));
        REQUIRE_THAT(targets::count_letters(s) == oracle_letter_count(s));
    }

    // summarize vs a sort-based oracle on 1e4 records
    std::vector<metrics::InvocationRecord> records;
    std::vector<double> client;
    for (int i = 0; i < 10'000; ++i) {
        metrics::InvocationRecord r;
        r.uuid = std::to_string(i);
        r.status = metrics::Status::Success;
        std::int64_t ns = static_cast<std::int64_t>(rng() % 5'000'000'000ull);
        r.client_timing = metrics::TimingSample{0, 0, protocol::hr_from_nanoseconds(ns)};
        client.push_back(static_cast<double>(ns) / 1e6);
        records.push_back(std::move(r));
    }
    auto summary = metrics::summarize(records);
    std::sort(client.begin(), client.end());
    double sum = 0;
    for (double v : client) sum += v;
    double mean = sum / client.size();
    auto rank = [&](double p) {
        auto r = static_cast<std::size_t>(std::ceil(p * client.size()));
        return client[std::max<std::size_t>(r, 1) - 1];
    };
    REQUIRE_THAT(std::abs(summary.client->min_ms - client.front()) < 1e-9);
    REQUIRE_THAT(std::abs(summary.client->max_ms - client.back()) < 1e-9);
    REQUIRE_THAT(std::abs(summary.client->mean_ms - mean) < 1e-6);
    REQUIRE_THAT(std::abs(summary.client->median_ms - client[(client.size() - 1) / 2]) < 1e-9);
    REQUIRE_THAT(std::abs(summary.client->p95_ms - rank(0.95)) < 1e-9);
    REQUIRE_THAT(std::abs(summary.client->p99_ms - rank(0.99)) < 1e-9);

    // CSV round trip is bit-exact for the serialized columns
    auto dir = temp_dir("faasbench_acc7");
    std::filesystem::create_directories(dir);
    auto path = dir + "/oracle.csv";
    metrics::write_csv(records, path);
    auto back = metrics::read_csv(path);
    REQUIRE_THAT(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        REQUIRE_THAT(back[i] == records[i]);
    }
    return true;
}

bool check_invalid_correlation(std::string& detail) {
    testsupport::UuidRewritingTarget rewriter;
    rewriter.start();
    proxy::ProxyServer proxy_server;
    proxy_server.start();

    bench::RunConfig config;
    config.proxy_uri = proxy_server.uri();
    config.target_uri = rewriter.uri();
    config.output_dir = temp_dir("faasbench_acc8");

    workload::BatchSpec spec;
    spec.total_requests = 2;
    spec.batch_size = 2;
    config.operation = spec;

    auto result = bench::run_benchmark(config);
    REQUIRE_THAT(result.records.size() == 2);
    for (const auto& r : result.records) {
        REQUIRE_THAT(r.status == metrics::Status::Invalid);
    }
    REQUIRE_THAT(result.summary.request_count == 2);
    REQUIRE_THAT(result.summary.success_ratio == 0.0);
    return true;
}

}  // namespace

int main() {
    criterion(1, "protocol fidelity", 1.0, check_protocol_fidelity);
    criterion(2, "end-to-end example", 5.0, check_end_to_end);
    criterion(3, "header growth pattern", 60.0, check_header_growth);
    criterion(4, "timeout probe", 10.0, check_timeout_probe);
    criterion(5, "cold-start probe", 15.0, check_cold_start);
    criterion(6, "concurrency cap", 30.0, check_concurrency_cap);
    criterion(7, "oracle equivalence", 30.0, check_oracle_equivalence);
    criterion(8, "invalid-correlation handling", 5.0, check_invalid_correlation);
    if (g_failures != 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
