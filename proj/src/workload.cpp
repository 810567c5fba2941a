#include "faasbench/workload.hpp"

#include <cmath>
#include <random>

namespace faasbench::workload {

namespace {

constexpr std::uint64_t kMaxWordLength = 8;

void check_spec(bool ok, const char* what) {
    if (!ok) throw WorkloadError(WorkloadError::Kind::BadSpec, what);
}

protocol::RequestEnvelope make_envelope(std::mt19937_64& rng, const std::string& target_uri,
                                        std::uint64_t words) {
    protocol::RequestEnvelope env;
    std::uint64_t hi = rng();
    std::uint64_t lo = rng();
    env.workload_uuid = protocol::make_uuid(hi, lo);
    env.target_uri = target_uri;
    env.workload_data = synthesize_words(words, rng());
    return env;
}

}  // namespace

std::string synthesize_words(std::uint64_t n, std::uint64_t seed, std::uint64_t budget_bytes) {
    // Worst case: 8 letters per word plus one separator.
    if (n > 0 && n * (kMaxWordLength + 1) - 1 > budget_bytes) {
        throw WorkloadError(WorkloadError::Kind::Capacity,
                            "synthesized payload would exceed the memory budget");
    }
    if (n == 0) return {};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> length_dist(1, static_cast<int>(kMaxWordLength));
    std::uniform_int_distribution<int> letter_dist(0, 25);
    std::string out;
    out.reserve(n * 5);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (i != 0) out.push_back(' ');
        int len = length_dist(rng);
        for (int j = 0; j < len; ++j) {
            out.push_back(static_cast<char>('a' + letter_dist(rng)));
        }
    }
    return out;
}

WorkloadPlan plan_batch(const BatchSpec& spec, const std::string& target_uri) {
    check_spec(spec.total_requests >= 1, "total_requests must be positive");
    check_spec(spec.batch_size >= 1 && spec.batch_size <= spec.total_requests,
               "batch_size must be in [1, total_requests]");
    check_spec(spec.max_in_flight >= 1, "max_in_flight must be >= 1");

    WorkloadPlan plan;
    plan.dispatch_mode = spec.dispatch_mode;
    plan.max_in_flight = spec.dispatch_mode == DispatchMode::Synchronous ? 1 : spec.max_in_flight;
    plan.batch_size = spec.batch_size;
    plan.invocations.reserve(spec.total_requests);

    std::mt19937_64 rng(spec.seed);
    for (std::uint64_t i = 0; i < spec.total_requests; ++i) {
        PlannedInvocation inv;
        inv.fire_offset_ms = 0;
        inv.word_count = spec.words_per_request;
        inv.envelope = make_envelope(rng, target_uri, spec.words_per_request);
        plan.invocations.push_back(std::move(inv));
    }
    return plan;
}

std::vector<std::int64_t> backoff_gaps(const BackoffSpec& spec) {
    std::vector<std::int64_t> gaps;
    gaps.reserve(spec.steps);
    double wait = static_cast<double>(spec.initial_wait_ms);
    std::int64_t prev = 0;
    for (std::uint64_t i = 0; i < spec.steps; ++i) {
        auto gap = static_cast<std::int64_t>(std::floor(wait));
        if (gap <= prev) gap = prev + 1;  // keep gaps strictly increasing
        gaps.push_back(gap);
        prev = gap;
        wait *= spec.multiplier;
    }
    return gaps;
}

WorkloadPlan plan_backoff(const BackoffSpec& spec, const std::string& target_uri) {
    check_spec(spec.initial_wait_ms > 0, "initial_wait must be positive");
    check_spec(spec.multiplier > 1.0, "multiplier must be > 1");
    check_spec(spec.steps >= 1, "steps must be >= 1");

    WorkloadPlan plan;
    plan.dispatch_mode = DispatchMode::Synchronous;
    plan.invocations.reserve(spec.steps + 1);

    std::mt19937_64 rng(spec.seed);
    std::int64_t offset = 0;

    PlannedInvocation baseline;
    baseline.fire_offset_ms = 0;
    baseline.word_count = spec.words_per_request;
    baseline.envelope = make_envelope(rng, target_uri, spec.words_per_request);
    plan.invocations.push_back(std::move(baseline));

    for (std::int64_t gap : backoff_gaps(spec)) {
        offset += gap;
        PlannedInvocation inv;
        inv.fire_offset_ms = offset;
        inv.word_count = spec.words_per_request;
        inv.envelope = make_envelope(rng, target_uri, spec.words_per_request);
        plan.invocations.push_back(std::move(inv));
    }
    return plan;
}

WorkloadPlan plan_timeout_probe(const TimeoutSpec& spec, const std::string& sleeper_uri) {
    check_spec(spec.requested_sleep_ms > 0, "requested_sleep must be positive");

    WorkloadPlan plan;
    plan.dispatch_mode = DispatchMode::Synchronous;
    // Timeout requires strictly exceeding the limit; sleep == limit succeeds.
    plan.expect_timeout = spec.requested_sleep_ms > spec.expected_limit_ms;

    std::mt19937_64 rng(static_cast<std::uint64_t>(spec.requested_sleep_ms));
    PlannedInvocation inv;
    inv.fire_offset_ms = 0;
    inv.word_count = 0;
    inv.envelope.workload_uuid = protocol::make_uuid(rng(), rng());
    inv.envelope.target_uri = sleeper_uri;
    inv.envelope.workload_data = "";
    inv.envelope.set_extra("faasbench_sleep_ms", std::to_string(spec.requested_sleep_ms));
    plan.invocations.push_back(std::move(inv));
    return plan;
}

}  // namespace faasbench::workload
