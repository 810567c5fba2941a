#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "faasbench/metrics.hpp"
#include "faasbench/protocol.hpp"
#include "faasbench/workload.hpp"

namespace faasbench::bench {

class BenchError : public std::runtime_error {
public:
    enum class Kind { ProxyUnreachable, Config, Io };

    BenchError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

using Operation =
    std::variant<workload::BatchSpec, workload::BackoffSpec, workload::TimeoutSpec>;

struct RunConfig {
    std::string proxy_uri;
    std::string target_uri;
    Operation operation = workload::BatchSpec{};
    std::string output_dir = ".";
    std::int64_t request_timeout_ms = 30'000;
    protocol::FieldList target_extras;  // mode flags forwarded to the target
};

// Reserved for the reachability preflight; never recorded.
inline constexpr const char* kPreflightUuid = "00000000";

struct RunResult {
    metrics::RunSummary summary;
    std::vector<metrics::InvocationRecord> records;
    std::string csv_path;
    std::string log_path;
};

// Executes the whole driver sequence: plan, dispatch (honoring dispatch
// mode and max_in_flight), correlate + classify, then summarize and write
// run.csv / run.log under output_dir.
RunResult run_benchmark(const RunConfig& config);

// Executes a pre-built plan; exposed for tests that need custom plans.
RunResult run_plan(const RunConfig& config, const workload::WorkloadPlan& plan);

// Recomputes the summary from the CSV alone.
metrics::RunSummary report(const std::string& csv_path);

std::string render_summary(const metrics::RunSummary& summary);

// Flat "key=value" properties file; keys mirror the CLI flags.
RunConfig load_config(const std::string& path);

}  // namespace faasbench::bench
