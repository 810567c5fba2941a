#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "faasbench/bench.hpp"
#include "faasbench/metrics.hpp"
#include "faasbench/protocol.hpp"
#include "faasbench/targets.hpp"
#include "faasbench/workload.hpp"

namespace py = pybind11;
using namespace faasbench;

PYBIND11_MODULE(pyfaasbench, m) {
    m.doc() = "FaaS benchmarking toolkit bindings";

    py::register_exception<protocol::CodecError>(m, "CodecError");
    py::register_exception<workload::WorkloadError>(m, "WorkloadError");
    py::register_exception<metrics::MetricsError>(m, "MetricsError");

    py::class_<protocol::HrDuration>(m, "HrDuration")
        .def(py::init<>())
        .def(py::init([](std::int64_t s, std::int64_t ns) {
                 return protocol::HrDuration{s, ns};
             }),
             py::arg("seconds"), py::arg("nanoseconds"))
        .def_readwrite("seconds", &protocol::HrDuration::seconds)
        .def_readwrite("nanoseconds", &protocol::HrDuration::nanoseconds)
        .def("total_nanoseconds", &protocol::HrDuration::total_nanoseconds)
        .def("milliseconds", &protocol::HrDuration::milliseconds)
        .def(py::self == py::self);

    py::class_<protocol::RequestEnvelope>(m, "RequestEnvelope")
        .def(py::init<>())
        .def_readwrite("workload_uuid", &protocol::RequestEnvelope::workload_uuid)
        .def_readwrite("target_uri", &protocol::RequestEnvelope::target_uri)
        .def_readwrite("workload_data", &protocol::RequestEnvelope::workload_data)
        .def_readwrite("extra", &protocol::RequestEnvelope::extra)
        .def("set_extra", &protocol::RequestEnvelope::set_extra);

    py::class_<protocol::ResponseEnvelope>(m, "ResponseEnvelope")
        .def(py::init<>())
        .def_readwrite("workload_uuid", &protocol::ResponseEnvelope::workload_uuid)
        .def_readwrite("target_start_time", &protocol::ResponseEnvelope::target_start_time)
        .def_readwrite("target_stop_time", &protocol::ResponseEnvelope::target_stop_time)
        .def_readwrite("target_run_time", &protocol::ResponseEnvelope::target_run_time)
        .def_readwrite("workload_result", &protocol::ResponseEnvelope::workload_result)
        .def_readwrite("proxy_start_time", &protocol::ResponseEnvelope::proxy_start_time)
        .def_readwrite("proxy_stop_time", &protocol::ResponseEnvelope::proxy_stop_time)
        .def_readwrite("proxy_run_time", &protocol::ResponseEnvelope::proxy_run_time)
        .def_readwrite("extra", &protocol::ResponseEnvelope::extra)
        .def("set_extra", &protocol::ResponseEnvelope::set_extra);

    m.def("encode_request", &protocol::encode_request);
    m.def("decode_request",
          [](const std::string& wire) { return protocol::decode_request(wire); });
    m.def("encode_response", &protocol::encode_response);
    m.def(
        "decode_response",
        [](const std::string& wire, bool target_reply) {
            return protocol::decode_response(
                wire, target_reply ? protocol::ReplyKind::Target : protocol::ReplyKind::Proxy);
        },
        py::arg("wire"), py::arg("target_reply") = false);
    m.def("correlate",
          [](const protocol::RequestEnvelope& req, const protocol::ResponseEnvelope& resp) {
              return protocol::correlate(req, resp) == protocol::Correlation::Valid;
          });
    m.def("origin_of", [](const std::string& field) {
        switch (protocol::origin_of(field)) {
            case protocol::Origin::Bench: return "bench";
            case protocol::Origin::Proxy: return "proxy";
            case protocol::Origin::Target: return "target";
            default: return "unknown";
        }
    });
    m.def("make_uuid", &protocol::make_uuid);

    m.def("count_words",
          [](const std::string& text) { return targets::count_words(text); });
    m.def("count_letters",
          [](const std::string& text) { return targets::count_letters(text); });
    m.def("synthesize_words", &workload::synthesize_words, py::arg("n"), py::arg("seed"),
          py::arg("budget_bytes") = workload::kDefaultPayloadBudgetBytes);

    m.def("format_ns_as_ms", &metrics::format_ns_as_ms);
    m.def("parse_ms_to_ns",
          [](const std::string& text) { return metrics::parse_ms_to_ns(text); });

    m.def("report", [](const std::string& csv_path) {
        auto summary = bench::report(csv_path);
        py::dict d;
        d["request_count"] = summary.request_count;
        d["success_count"] = summary.success_count;
        d["success_ratio"] = summary.success_ratio;
        if (summary.client) {
            py::dict c;
            c["mean_ms"] = summary.client->mean_ms;
            c["median_ms"] = summary.client->median_ms;
            c["p95_ms"] = summary.client->p95_ms;
            c["p99_ms"] = summary.client->p99_ms;
            d["client"] = c;
        }
        return d;
    });
}
