#include "faasbench/protocol.hpp"

#include <array>
#include <charconv>

#include <json.hpp>

namespace faasbench::protocol {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kBenchPrefix = "faasbench_";
constexpr std::string_view kProxyPrefix = "proxy_";
constexpr std::string_view kTargetPrefix = "target_";
constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

constexpr std::array<std::string_view, 9> kCoreResponseFields = {
    "proxy_workload_uuid",
    "target_start_time",
    "target_stop_time",
    "target_run_time_hr_seconds",
    "target_run_time_hr_nanoseconds",
    "target_workload_result",
    "proxy_start_time",
    "proxy_stop_time",
    "proxy_run_time_hr_seconds",
};

bool is_core_response_field(std::string_view name) {
    for (auto f : kCoreResponseFields) {
        if (name == f) return true;
    }
    return name == "proxy_run_time_hr_nanoseconds";
}

ordered_json parse_object(std::string_view wire) {
    ordered_json j = ordered_json::parse(wire, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw CodecError(CodecError::Kind::Malformed, "message is not a JSON object");
    }
    return j;
}

std::string value_as_string(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::int64_t require_integer(const ordered_json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw CodecError(CodecError::Kind::MissingField, std::string("missing field: ") + name);
    }
    if (!it->is_number_integer()) {
        throw CodecError(CodecError::Kind::Malformed, std::string("field is not an integer: ") + name);
    }
    return it->get<std::int64_t>();
}

std::string require_string(const ordered_json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw CodecError(CodecError::Kind::MissingField, std::string("missing field: ") + name);
    }
    if (!it->is_string()) {
        throw CodecError(CodecError::Kind::Malformed, std::string("field is not a string: ") + name);
    }
    return it->get<std::string>();
}

void check_time_range(std::int64_t value, const char* name) {
    if (value < 0) {
        throw CodecError(CodecError::Kind::Range, std::string("negative time: ") + name);
    }
}

HrDuration read_hr(const ordered_json& j, const char* sec_name, const char* ns_name) {
    HrDuration hr;
    hr.seconds = require_integer(j, sec_name);
    hr.nanoseconds = require_integer(j, ns_name);
    if (hr.seconds < 0) {
        throw CodecError(CodecError::Kind::Range, std::string("negative seconds: ") + sec_name);
    }
    if (hr.nanoseconds < 0 || hr.nanoseconds >= kNanosPerSecond) {
        throw CodecError(CodecError::Kind::Range,
                         std::string("nanoseconds out of [0, 1e9): ") + ns_name);
    }
    return hr;
}

const std::string* find_field(const FieldList& fields, std::string_view name) {
    for (const auto& [k, v] : fields) {
        if (k == name) return &v;
    }
    return nullptr;
}

void set_field(FieldList& fields, std::string_view name, std::string value) {
    for (auto& [k, v] : fields) {
        if (k == name) {
            v = std::move(value);
            return;
        }
    }
    fields.emplace_back(std::string(name), std::move(value));
}

}  // namespace

Origin origin_of(std::string_view field_name) {
    if (field_name == "target_uri") return Origin::Bench;  // authored by the driver
    if (field_name.starts_with(kBenchPrefix)) return Origin::Bench;
    if (field_name.starts_with(kProxyPrefix)) return Origin::Proxy;
    if (field_name.starts_with(kTargetPrefix)) return Origin::Target;
    return Origin::Unknown;
}

std::string_view origin_prefix(Origin origin) {
    switch (origin) {
        case Origin::Bench: return kBenchPrefix;
        case Origin::Proxy: return kProxyPrefix;
        case Origin::Target: return kTargetPrefix;
        case Origin::Unknown: break;
    }
    return {};
}

HrDuration hr_from_nanoseconds(std::int64_t total_ns) {
    if (total_ns < 0) {
        throw CodecError(CodecError::Kind::Range, "negative duration");
    }
    return {total_ns / kNanosPerSecond, total_ns % kNanosPerSecond};
}

const std::string* RequestEnvelope::find_extra(std::string_view name) const {
    return find_field(extra, name);
}

void RequestEnvelope::set_extra(std::string_view name, std::string value) {
    set_field(extra, name, std::move(value));
}

const std::string* ResponseEnvelope::find_extra(std::string_view name) const {
    return find_field(extra, name);
}

void ResponseEnvelope::set_extra(std::string_view name, std::string value) {
    set_field(extra, name, std::move(value));
}

std::string encode_request(const RequestEnvelope& env) {
    ordered_json j;
    j["faasbench_workload_uuid"] = env.workload_uuid;
    j["target_uri"] = env.target_uri;
    j["faasbench_workload_data"] = env.workload_data;
    for (const auto& [name, value] : env.extra) {
        j[name] = value;
    }
    return j.dump();
}

RequestEnvelope decode_request(std::string_view wire) {
    ordered_json j = parse_object(wire);
    RequestEnvelope env;
    env.workload_uuid = require_string(j, "faasbench_workload_uuid");
    env.target_uri = require_string(j, "target_uri");
    env.workload_data = require_string(j, "faasbench_workload_data");
    for (const auto& [name, value] : j.items()) {
        if (name == "faasbench_workload_uuid" || name == "target_uri" ||
            name == "faasbench_workload_data") {
            continue;
        }
        if (origin_of(name) == Origin::Unknown) {
            throw CodecError(CodecError::Kind::BadPrefix,
                             "field without origin prefix: " + name);
        }
        env.extra.emplace_back(name, value_as_string(value));
    }
    return env;
}

std::string encode_response(const ResponseEnvelope& env) {
    ordered_json j;
    if (env.workload_uuid) {
        j["proxy_workload_uuid"] = *env.workload_uuid;
    }
    if (env.target_start_time) j["target_start_time"] = *env.target_start_time;
    if (env.target_stop_time) j["target_stop_time"] = *env.target_stop_time;
    if (env.target_run_time) {
        j["target_run_time_hr_seconds"] = env.target_run_time->seconds;
        j["target_run_time_hr_nanoseconds"] = env.target_run_time->nanoseconds;
    }
    if (env.workload_result) j["target_workload_result"] = *env.workload_result;
    if (env.proxy_start_time) j["proxy_start_time"] = *env.proxy_start_time;
    if (env.proxy_stop_time) j["proxy_stop_time"] = *env.proxy_stop_time;
    if (env.proxy_run_time) {
        j["proxy_run_time_hr_seconds"] = env.proxy_run_time->seconds;
        j["proxy_run_time_hr_nanoseconds"] = env.proxy_run_time->nanoseconds;
    }
    for (const auto& [name, value] : env.extra) {
        j[name] = value;
    }
    return j.dump();
}

ResponseEnvelope decode_response(std::string_view wire, ReplyKind kind) {
    ordered_json j = parse_object(wire);
    ResponseEnvelope env;

    if (kind == ReplyKind::Proxy) {
        env.workload_uuid = require_string(j, "proxy_workload_uuid");
    } else if (j.contains("proxy_workload_uuid")) {
        env.workload_uuid = require_string(j, "proxy_workload_uuid");
    }

    bool has_target_core = j.contains("target_start_time") || j.contains("target_stop_time") ||
                           j.contains("target_run_time_hr_seconds") ||
                           j.contains("target_workload_result");
    if (kind == ReplyKind::Target || has_target_core) {
        env.target_start_time = require_integer(j, "target_start_time");
        env.target_stop_time = require_integer(j, "target_stop_time");
        check_time_range(*env.target_start_time, "target_start_time");
        check_time_range(*env.target_stop_time, "target_stop_time");
        if (*env.target_stop_time < *env.target_start_time) {
            throw CodecError(CodecError::Kind::Range, "target_stop_time before target_start_time");
        }
        env.target_run_time =
            read_hr(j, "target_run_time_hr_seconds", "target_run_time_hr_nanoseconds");
        env.workload_result = require_string(j, "target_workload_result");
    }

    if (j.contains("proxy_start_time") || j.contains("proxy_stop_time")) {
        env.proxy_start_time = require_integer(j, "proxy_start_time");
        env.proxy_stop_time = require_integer(j, "proxy_stop_time");
        check_time_range(*env.proxy_start_time, "proxy_start_time");
        check_time_range(*env.proxy_stop_time, "proxy_stop_time");
        if (*env.proxy_stop_time < *env.proxy_start_time) {
            throw CodecError(CodecError::Kind::Range, "proxy_stop_time before proxy_start_time");
        }
    }
    if (j.contains("proxy_run_time_hr_seconds") || j.contains("proxy_run_time_hr_nanoseconds")) {
        env.proxy_run_time =
            read_hr(j, "proxy_run_time_hr_seconds", "proxy_run_time_hr_nanoseconds");
    }

    for (const auto& [name, value] : j.items()) {
        if (is_core_response_field(name)) continue;
        if (origin_of(name) == Origin::Unknown) {
            throw CodecError(CodecError::Kind::BadPrefix,
                             "field without origin prefix: " + name);
        }
        env.extra.emplace_back(name, value_as_string(value));
    }
    return env;
}

Correlation correlate(const RequestEnvelope& req, const ResponseEnvelope& resp) {
    if (!resp.workload_uuid) return Correlation::Invalid;
    return *resp.workload_uuid == req.workload_uuid ? Correlation::Valid : Correlation::Invalid;
}

std::string make_uuid(std::uint64_t hi, std::uint64_t lo) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(32, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[hi & 0xf];
        hi >>= 4;
    }
    for (int i = 31; i >= 16; --i) {
        out[i] = digits[lo & 0xf];
        lo >>= 4;
    }
    return out;
}

std::optional<Uri> parse_uri(std::string_view uri) {
    auto scheme_end = uri.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
    Uri out;
    out.scheme = std::string(uri.substr(0, scheme_end));
    std::string_view rest = uri.substr(scheme_end + 3);
    auto path_start = rest.find('/');
    std::string_view authority = rest.substr(0, path_start);
    out.path = path_start == std::string_view::npos ? "/" : std::string(rest.substr(path_start));
    if (authority.empty()) return std::nullopt;
    auto colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        out.host = std::string(authority.substr(0, colon));
        std::string_view port_sv = authority.substr(colon + 1);
        int port = 0;
        auto [ptr, ec] = std::from_chars(port_sv.data(), port_sv.data() + port_sv.size(), port);
        if (ec != std::errc() || ptr != port_sv.data() + port_sv.size()) return std::nullopt;
        out.port = port;
    } else {
        out.host = std::string(authority);
        out.port = out.scheme == "https" ? 443 : 80;
    }
    if (out.host.empty()) return std::nullopt;
    return out;
}

}  // namespace faasbench::protocol
