#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "faasbench/protocol.hpp"

namespace faasbench::metrics {

class MetricsError : public std::runtime_error {
public:
    enum class Kind { Clock, EmptyRun, Io, Schema };

    MetricsError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// One timing layer: wall-clock endpoints plus a monotonic-clock duration.
// hr_elapsed never comes from epoch subtraction.
struct TimingSample {
    std::int64_t epoch_start_ms = 0;
    std::int64_t epoch_stop_ms = 0;
    protocol::HrDuration hr_elapsed;

    friend bool operator==(const TimingSample&, const TimingSample&) = default;
};

enum class MeasurePoint { M1, M2, M3, M4 };

struct SizeSample {
    MeasurePoint point = MeasurePoint::M1;
    std::uint64_t header_bytes = 0;
    std::uint64_t body_bytes = 0;

    friend bool operator==(const SizeSample&, const SizeSample&) = default;
};

enum class Status {
    Success,
    Invalid,
    GatewayTimeout,
    FunctionTimeout,
    TransportError,
    FunctionError,
};

std::string_view status_name(Status s);
std::optional<Status> status_from_name(std::string_view name);

struct InvocationRecord {
    std::string uuid;
    Status status = Status::TransportError;
    std::uint64_t words = 0;
    std::optional<TimingSample> client_timing;
    std::optional<TimingSample> proxy_timing;
    std::optional<TimingSample> target_timing;
    std::array<std::optional<SizeSample>, 4> sizes;  // indexed by MeasurePoint
    std::string result;
    std::string error_detail;

    friend bool operator==(const InvocationRecord&, const InvocationRecord&) = default;
};

struct LayerStats {
    double min_ms = 0, max_ms = 0, mean_ms = 0, median_ms = 0;
    double p95_ms = 0, p99_ms = 0, stddev_ms = 0;
};

struct RunSummary {
    std::uint64_t request_count = 0;
    std::uint64_t success_count = 0;
    double success_ratio = 0.0;
    std::optional<LayerStats> client, proxy, target;
    std::array<std::uint64_t, 4> total_header_bytes{};  // per measurement point
    std::array<std::uint64_t, 4> total_body_bytes{};
    double total_runtime_ms = 0.0;
};

using Clock = std::chrono::steady_clock;

std::int64_t epoch_now_ms();

// Normalized monotonic-clock interval; throws MetricsError::Clock when the
// stop mark precedes the start mark.
protocol::HrDuration hr_elapsed(Clock::time_point start, Clock::time_point stop);

SizeSample measure_http_sizes(std::string_view raw_head, std::string_view raw_body,
                              MeasurePoint point);

// Reassembles an HTTP header block (start line + "k: v" lines + blank line)
// for size accounting where the raw wire bytes are not observable.
std::string build_header_block(std::string_view start_line,
                               const std::vector<std::pair<std::string, std::string>>& headers);

// Status precedence: TransportError > GatewayTimeout > FunctionTimeout >
// FunctionError > Invalid > Success.
Status classify(const std::optional<protocol::ResponseEnvelope>& response,
                const protocol::RequestEnvelope& request);

RunSummary summarize(const std::vector<InvocationRecord>& records);

std::size_t write_csv(const std::vector<InvocationRecord>& records, const std::string& path);
std::vector<InvocationRecord> read_csv(const std::string& path);

// Exact decimal milliseconds for an integer nanosecond count ("26.250589").
std::string format_ns_as_ms(std::int64_t ns);
std::int64_t parse_ms_to_ns(std::string_view text);

// Append-only run log: one "ISO8601 LEVEL message" line per event.
class RunLog {
public:
    explicit RunLog(const std::string& path);
    void info(const std::string& message);
    void error(const std::string& message);

private:
    void write_line(const char* level, const std::string& message);

    std::string path_;
    std::mutex mutex_;
};

// Serialized append store; total order = completion order.
class RecordStore {
public:
    void append(InvocationRecord record);
    std::vector<InvocationRecord> snapshot() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<InvocationRecord> records_;
};

}  // namespace faasbench::metrics
