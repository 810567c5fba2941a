#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace faasbench::protocol {

// Which component authored a message field, derived from its name prefix.
enum class Origin { Bench, Proxy, Target, Unknown };

Origin origin_of(std::string_view field_name);
std::string_view origin_prefix(Origin origin);

class CodecError : public std::runtime_error {
public:
    enum class Kind { Malformed, MissingField, BadPrefix, Range };

    CodecError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Monotonic-clock duration as a (seconds, nanoseconds) pair with
// 0 <= nanoseconds < 1e9.
struct HrDuration {
    std::int64_t seconds = 0;
    std::int64_t nanoseconds = 0;

    std::int64_t total_nanoseconds() const {
        return seconds * 1'000'000'000 + nanoseconds;
    }
    double milliseconds() const {
        return static_cast<double>(total_nanoseconds()) / 1e6;
    }

    friend bool operator==(const HrDuration&, const HrDuration&) = default;
};

HrDuration hr_from_nanoseconds(std::int64_t total_ns);

using FieldList = std::vector<std::pair<std::string, std::string>>;

// Driver-authored invocation message (driver -> proxy -> target).
struct RequestEnvelope {
    std::string workload_uuid;
    std::string target_uri;
    std::string workload_data;
    FieldList extra;  // additional origin-prefixed string fields, order kept

    const std::string* find_extra(std::string_view name) const;
    void set_extra(std::string_view name, std::string value);

    friend bool operator==(const RequestEnvelope&, const RequestEnvelope&) = default;
};

// Result message travelling back (target -> proxy -> driver).  A bare target
// reply carries only the target_* fields; the proxy adds its uuid echo,
// timing fields, and enrichment extras.
struct ResponseEnvelope {
    std::optional<std::string> workload_uuid;  // absent in bare target replies
    std::optional<std::int64_t> target_start_time;  // ms since Unix epoch
    std::optional<std::int64_t> target_stop_time;
    std::optional<HrDuration> target_run_time;
    std::optional<std::string> workload_result;
    std::optional<std::int64_t> proxy_start_time;
    std::optional<std::int64_t> proxy_stop_time;
    std::optional<HrDuration> proxy_run_time;
    FieldList extra;  // status descriptors and enrichment fields

    const std::string* find_extra(std::string_view name) const;
    void set_extra(std::string_view name, std::string value);

    friend bool operator==(const ResponseEnvelope&, const ResponseEnvelope&) = default;
};

// Who produced a response body; controls which fields are mandatory.
enum class ReplyKind { Target, Proxy };

std::string encode_request(const RequestEnvelope& env);
RequestEnvelope decode_request(std::string_view wire);

std::string encode_response(const ResponseEnvelope& env);
ResponseEnvelope decode_response(std::string_view wire, ReplyKind kind = ReplyKind::Proxy);

enum class Correlation { Valid, Invalid };

// Byte-for-byte uuid comparison between a request and the response echoing it.
Correlation correlate(const RequestEnvelope& req, const ResponseEnvelope& resp);

// 32-hex-char token from a seeded generator state; any non-empty opaque
// string is accepted on the wire.
std::string make_uuid(std::uint64_t hi, std::uint64_t lo);

// Minimal absolute-URI split (scheme, host, port, path).
struct Uri {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path;
};

std::optional<Uri> parse_uri(std::string_view uri);

}  // namespace faasbench::protocol
