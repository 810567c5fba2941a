#include "faasbench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace faasbench::metrics {

namespace {

constexpr std::array<const char*, 18> kCsvColumns = {
    "uuid", "status", "words",
    "m1_header_b", "m1_body_b", "m2_header_b", "m2_body_b",
    "m3_header_b", "m3_body_b", "m4_header_b", "m4_body_b",
    "client_ms", "proxy_ms", "target_ms",
    "target_start_epoch_ms", "target_stop_epoch_ms",
    "result", "error",
};

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// RFC 4180 line split; returns fields of one record, consuming quoted newlines.
std::vector<std::string> parse_csv_record(std::istream& in, bool& ok) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(static_cast<char>(c));
        }
    }
    ok = any;
    if (any) fields.push_back(std::move(field));
    return fields;
}

std::int64_t parse_int(std::string_view sv, const char* what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc() || ptr != sv.data() + sv.size()) {
        throw MetricsError(MetricsError::Kind::Schema, std::string("bad integer field: ") + what);
    }
    return v;
}

double duration_ms(const TimingSample& t) { return t.hr_elapsed.milliseconds(); }

LayerStats compute_stats(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    LayerStats s;
    s.min_ms = values.front();
    s.max_ms = values.back();
    double sum = 0;
    for (double v : values) sum += v;
    s.mean_ms = sum / static_cast<double>(n);
    s.median_ms = values[(n - 1) / 2];  // lower median
    auto nearest_rank = [&](double p) {
        std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
        if (rank == 0) rank = 1;
        return values[rank - 1];
    };
    s.p95_ms = nearest_rank(0.95);
    s.p99_ms = nearest_rank(0.99);
    double sq = 0;
    for (double v : values) sq += (v - s.mean_ms) * (v - s.mean_ms);
    s.stddev_ms = std::sqrt(sq / static_cast<double>(n));
    return s;
}

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

}  // namespace

std::string_view status_name(Status s) {
    switch (s) {
        case Status::Success: return "Success";
        case Status::Invalid: return "Invalid";
        case Status::GatewayTimeout: return "GatewayTimeout";
        case Status::FunctionTimeout: return "FunctionTimeout";
        case Status::TransportError: return "TransportError";
        case Status::FunctionError: return "FunctionError";
    }
    return "Unknown";
}

std::optional<Status> status_from_name(std::string_view name) {
    for (Status s : {Status::Success, Status::Invalid, Status::GatewayTimeout,
                     Status::FunctionTimeout, Status::TransportError, Status::FunctionError}) {
        if (status_name(s) == name) return s;
    }
    return std::nullopt;
}

std::int64_t epoch_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

protocol::HrDuration hr_elapsed(Clock::time_point start, Clock::time_point stop) {
    if (stop < start) {
        throw MetricsError(MetricsError::Kind::Clock, "stop mark precedes start mark");
    }
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
    return protocol::hr_from_nanoseconds(ns);
}

SizeSample measure_http_sizes(std::string_view raw_head, std::string_view raw_body,
                              MeasurePoint point) {
    return {point, raw_head.size(), raw_body.size()};
}

std::string build_header_block(std::string_view start_line,
                               const std::vector<std::pair<std::string, std::string>>& headers) {
    std::string block;
    block.append(start_line);
    block.append("\r\n");
    for (const auto& [k, v] : headers) {
        block.append(k);
        block.append(": ");
        block.append(v);
        block.append("\r\n");
    }
    block.append("\r\n");
    return block;
}

Status classify(const std::optional<protocol::ResponseEnvelope>& response,
                const protocol::RequestEnvelope& request) {
    if (!response) return Status::TransportError;
    const auto& resp = *response;
    const std::string* proxy_error = resp.find_extra("proxy_error");
    if ((proxy_error && *proxy_error == "gateway timeout") ||
        resp.find_extra("target_gateway_error") != nullptr) {
        return Status::GatewayTimeout;
    }
    if (const std::string* target_error = resp.find_extra("target_error")) {
        if (target_error->find("timeout") != std::string::npos) return Status::FunctionTimeout;
        return Status::FunctionError;
    }
    if (proxy_error) return Status::FunctionError;
    if (protocol::correlate(request, resp) == protocol::Correlation::Invalid) {
        return Status::Invalid;
    }
    return Status::Success;
}

RunSummary summarize(const std::vector<InvocationRecord>& records) {
    if (records.empty()) {
        throw MetricsError(MetricsError::Kind::EmptyRun, "no invocation records");
    }
    RunSummary summary;
    summary.request_count = records.size();

    std::vector<double> client_ms, proxy_ms, target_ms;
    std::int64_t first_start = 0, last_stop = 0;
    bool have_client_epoch = false;

    for (const auto& r : records) {
        if (r.status == Status::Success) {
            ++summary.success_count;
            if (r.client_timing) client_ms.push_back(duration_ms(*r.client_timing));
            if (r.proxy_timing) proxy_ms.push_back(duration_ms(*r.proxy_timing));
            if (r.target_timing) target_ms.push_back(duration_ms(*r.target_timing));
        }
        for (std::size_t i = 0; i < 4; ++i) {
            if (r.sizes[i]) {
                summary.total_header_bytes[i] += r.sizes[i]->header_bytes;
                summary.total_body_bytes[i] += r.sizes[i]->body_bytes;
            }
        }
        if (r.client_timing) {
            if (!have_client_epoch) {
                first_start = r.client_timing->epoch_start_ms;
                last_stop = r.client_timing->epoch_stop_ms;
                have_client_epoch = true;
            } else {
                first_start = std::min(first_start, r.client_timing->epoch_start_ms);
                last_stop = std::max(last_stop, r.client_timing->epoch_stop_ms);
            }
        }
    }

    summary.success_ratio =
        static_cast<double>(summary.success_count) / static_cast<double>(summary.request_count);
    if (!client_ms.empty()) summary.client = compute_stats(std::move(client_ms));
    if (!proxy_ms.empty()) summary.proxy = compute_stats(std::move(proxy_ms));
    if (!target_ms.empty()) summary.target = compute_stats(std::move(target_ms));
    if (have_client_epoch) summary.total_runtime_ms = static_cast<double>(last_stop - first_start);
    return summary;
}

std::string format_ns_as_ms(std::int64_t ns) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%lld.%06lld",
                  static_cast<long long>(ns / 1'000'000),
                  static_cast<long long>(ns % 1'000'000));
    return buf;
}

std::int64_t parse_ms_to_ns(std::string_view text) {
    auto dot = text.find('.');
    std::string_view int_part = dot == std::string_view::npos ? text : text.substr(0, dot);
    std::int64_t ms = parse_int(int_part, "ms");
    std::int64_t frac_ns = 0;
    if (dot != std::string_view::npos) {
        std::string frac(text.substr(dot + 1));
        frac.resize(6, '0');
        frac_ns = parse_int(frac, "ms fraction");
    }
    return ms * 1'000'000 + frac_ns;
}

std::size_t write_csv(const std::vector<InvocationRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw MetricsError(MetricsError::Kind::Io, "cannot open for writing: " + path);
    }
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i) out << ',';
        out << kCsvColumns[i];
    }
    out << "\r\n";

    auto hr_cell = [](const std::optional<TimingSample>& t) {
        return t ? format_ns_as_ms(t->hr_elapsed.total_nanoseconds()) : std::string();
    };
    auto size_cells = [](const std::optional<SizeSample>& s) {
        if (!s) return std::pair<std::string, std::string>{};
        return std::pair{std::to_string(s->header_bytes), std::to_string(s->body_bytes)};
    };

    for (const auto& r : records) {
        std::vector<std::string> cells;
        cells.push_back(r.uuid);
        cells.emplace_back(status_name(r.status));
        cells.push_back(std::to_string(r.words));
        for (const auto& s : r.sizes) {
            auto [h, b] = size_cells(s);
            cells.push_back(h);
            cells.push_back(b);
        }
        cells.push_back(hr_cell(r.client_timing));
        cells.push_back(hr_cell(r.proxy_timing));
        cells.push_back(hr_cell(r.target_timing));
        cells.push_back(r.target_timing ? std::to_string(r.target_timing->epoch_start_ms) : "");
        cells.push_back(r.target_timing ? std::to_string(r.target_timing->epoch_stop_ms) : "");
        cells.push_back(r.result);
        cells.push_back(r.error_detail);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << csv_quote(cells[i]);
        }
        out << "\r\n";
    }
    if (!out) {
        throw MetricsError(MetricsError::Kind::Io, "write failed: " + path);
    }
    return records.size();
}

std::vector<InvocationRecord> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MetricsError(MetricsError::Kind::Io, "cannot open for reading: " + path);
    }
    bool ok = false;
    auto header = parse_csv_record(in, ok);
    if (!ok || header.size() != kCsvColumns.size()) {
        throw MetricsError(MetricsError::Kind::Schema, "unexpected CSV column count");
    }
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (header[i] != kCsvColumns[i]) {
            throw MetricsError(MetricsError::Kind::Schema, "unexpected CSV column: " + header[i]);
        }
    }

    std::vector<InvocationRecord> records;
    for (;;) {
        auto row = parse_csv_record(in, ok);
        if (!ok) break;
        if (row.size() == 1 && row[0].empty()) continue;  // trailing newline
        if (row.size() != kCsvColumns.size()) {
            throw MetricsError(MetricsError::Kind::Schema, "row with wrong field count");
        }
        InvocationRecord r;
        r.uuid = row[0];
        auto status = status_from_name(row[1]);
        if (!status) {
            throw MetricsError(MetricsError::Kind::Schema, "unknown status: " + row[1]);
        }
        r.status = *status;
        r.words = static_cast<std::uint64_t>(parse_int(row[2], "words"));
        for (std::size_t i = 0; i < 4; ++i) {
            const std::string& h = row[3 + 2 * i];
            const std::string& b = row[4 + 2 * i];
            if (!h.empty() || !b.empty()) {
                SizeSample s;
                s.point = static_cast<MeasurePoint>(i);
                s.header_bytes = static_cast<std::uint64_t>(parse_int(h, "header bytes"));
                s.body_bytes = static_cast<std::uint64_t>(parse_int(b, "body bytes"));
                r.sizes[i] = s;
            }
        }
        auto timing_from = [&](const std::string& cell) -> std::optional<TimingSample> {
            if (cell.empty()) return std::nullopt;
            TimingSample t;
            t.hr_elapsed = protocol::hr_from_nanoseconds(parse_ms_to_ns(cell));
            return t;
        };
        r.client_timing = timing_from(row[11]);
        r.proxy_timing = timing_from(row[12]);
        r.target_timing = timing_from(row[13]);
        if (r.target_timing) {
            r.target_timing->epoch_start_ms = parse_int(row[14], "target_start_epoch_ms");
            r.target_timing->epoch_stop_ms = parse_int(row[15], "target_stop_epoch_ms");
        }
        r.result = row[16];
        r.error_detail = row[17];
        records.push_back(std::move(r));
    }
    return records;
}

RunLog::RunLog(const std::string& path) : path_(path) {
    std::ofstream probe(path_, std::ios::app);
    if (!probe) {
        throw MetricsError(MetricsError::Kind::Io, "cannot open log: " + path_);
    }
}

void RunLog::info(const std::string& message) { write_line("INFO", message); }
void RunLog::error(const std::string& message) { write_line("ERROR", message); }

void RunLog::write_line(const char* level, const std::string& message) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    out << iso8601_now() << ' ' << level << ' ' << message << '\n';
    if (!out) {
        throw MetricsError(MetricsError::Kind::Io, "log write failed: " + path_);
    }
}

void RecordStore::append(InvocationRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
}

std::vector<InvocationRecord> RecordStore::snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t RecordStore::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

}  // namespace faasbench::metrics
