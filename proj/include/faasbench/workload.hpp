#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "faasbench/protocol.hpp"

namespace faasbench::workload {

class WorkloadError : public std::runtime_error {
public:
    enum class Kind { Capacity, BadSpec };

    WorkloadError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

enum class DispatchMode { Synchronous, Asynchronous };

struct BatchSpec {
    std::uint64_t total_requests = 1;
    std::uint64_t batch_size = 1;
    DispatchMode dispatch_mode = DispatchMode::Synchronous;
    std::uint64_t max_in_flight = 1;  // Asynchronous only
    std::uint64_t words_per_request = 0;
    std::uint64_t seed = 0;
};

struct BackoffSpec {
    std::int64_t initial_wait_ms = 100;
    double multiplier = 2.0;
    std::uint64_t steps = 8;
    std::uint64_t words_per_request = 0;
    std::uint64_t seed = 0;
};

enum class TimeoutLevel { Gateway, Function };

struct TimeoutSpec {
    std::int64_t requested_sleep_ms = 0;
    std::int64_t expected_limit_ms = 0;
    TimeoutLevel level_under_test = TimeoutLevel::Gateway;
};

struct PlannedInvocation {
    std::int64_t fire_offset_ms = 0;  // from run start, non-decreasing in a plan
    protocol::RequestEnvelope envelope;
    std::uint64_t word_count = 0;
};

struct WorkloadPlan {
    std::vector<PlannedInvocation> invocations;
    DispatchMode dispatch_mode = DispatchMode::Synchronous;
    std::uint64_t max_in_flight = 1;
    std::uint64_t batch_size = 1;
    bool expect_timeout = false;  // timeout probes only
};

// Default per-payload memory budget (64 MiB).
constexpr std::uint64_t kDefaultPayloadBudgetBytes = 64ull << 20;

// Deterministic text of exactly n words: lowercase a-z, word lengths
// uniform in [1, 8], single-space separated.
std::string synthesize_words(std::uint64_t n, std::uint64_t seed,
                             std::uint64_t budget_bytes = kDefaultPayloadBudgetBytes);

WorkloadPlan plan_batch(const BatchSpec& spec, const std::string& target_uri);
WorkloadPlan plan_backoff(const BackoffSpec& spec, const std::string& target_uri);
WorkloadPlan plan_timeout_probe(const TimeoutSpec& spec, const std::string& sleeper_uri);

// The wait schedule w_i = floor(initial * multiplier^i), forced strictly
// increasing. Exposed for tests and latency analysis.
std::vector<std::int64_t> backoff_gaps(const BackoffSpec& spec);

}  // namespace faasbench::workload
