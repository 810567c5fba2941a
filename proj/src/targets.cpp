#include "faasbench/targets.hpp"

#include <charconv>
#include <chrono>
#include <condition_variable>
#include <future>
#include <thread>

#include "faasbench/metrics.hpp"

namespace faasbench::targets {

namespace {

using protocol::RequestEnvelope;
using protocol::ResponseEnvelope;

// Scheduling slack added to the watchdog so an invocation finishing exactly
// at the limit is not misreported as a timeout. Stays within the 100 ms
// detection-latency bound.
constexpr std::int64_t kWatchdogGraceMs = 50;

struct TimingScope {
    std::int64_t start_epoch = metrics::epoch_now_ms();
    metrics::Clock::time_point start_mark = metrics::Clock::now();

    void stamp(ResponseEnvelope& env) const {
        env.target_start_time = start_epoch;
        env.target_stop_time = metrics::epoch_now_ms();
        env.target_run_time = metrics::hr_elapsed(start_mark, metrics::Clock::now());
    }
};

}  // namespace

struct CancelToken {
    std::mutex mutex;
    std::condition_variable cv;
    bool cancelled = false;

    void cancel() {
        {
            std::lock_guard lock(mutex);
            cancelled = true;
        }
        cv.notify_all();
    }

    // Returns true when the full interval elapsed without cancellation.
    bool sleep_for_ms(std::int64_t ms) {
        std::unique_lock lock(mutex);
        return !cv.wait_for(lock, std::chrono::milliseconds(ms), [this] { return cancelled; });
    }
};

std::uint64_t count_words(std::string_view text) {
    std::uint64_t words = 0;
    bool in_word = false;
    for (char c : text) {
        if (c == ' ') {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

std::uint64_t count_letters(std::string_view text) {
    std::uint64_t letters = 0;
    for (unsigned char c : text) {
        if (c == ' ') continue;
        if ((c & 0xC0) == 0x80) continue;  // UTF-8 continuation byte
        ++letters;
    }
    return letters;
}

ResponseEnvelope handle_wordcount(const RequestEnvelope& env) {
    TimingScope timing;
    ResponseEnvelope resp;
    const std::string* mode = env.find_extra("faasbench_mode");
    if (mode && *mode == "full") {
        resp.workload_result = "words=" + std::to_string(count_words(env.workload_data)) +
                               ";letters=" + std::to_string(count_letters(env.workload_data));
    } else {
        resp.workload_result = std::to_string(count_letters(env.workload_data));
    }
    timing.stamp(resp);
    return resp;
}

ResponseEnvelope handle_sleep(const RequestEnvelope& env,
                              const std::shared_ptr<CancelToken>& cancel) {
    TimingScope timing;
    ResponseEnvelope resp;
    const std::string* raw = env.find_extra("faasbench_sleep_ms");
    std::int64_t sleep_ms = -1;
    if (raw && !raw->empty()) {
        auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), sleep_ms);
        if (ec != std::errc() || ptr != raw->data() + raw->size()) sleep_ms = -1;
    }
    if (sleep_ms < 0) {
        resp.workload_result = "";
        resp.set_extra("target_error", "bad sleep parameter");
        timing.stamp(resp);
        return resp;
    }
    if (sleep_ms > 0) cancel->sleep_for_ms(sleep_ms);
    resp.workload_result = std::to_string(sleep_ms);
    timing.stamp(resp);
    return resp;
}

TargetServer::TargetServer(GatewayConfig config) : config_(config) {
    server_.Post("/func/word", [this](const httplib::Request& req, httplib::Response& res) {
        dispatch(req, res, /*sleeper=*/false);
    });
    server_.Post("/func/sleep", [this](const httplib::Request& req, httplib::Response& res) {
        dispatch(req, res, /*sleeper=*/true);
    });
}

TargetServer::~TargetServer() { stop(); }

int TargetServer::start(const std::string& host, int port) {
    host_ = host;
    return runner_.start(server_, host, port);
}

void TargetServer::stop() { runner_.stop(); }

std::string TargetServer::uri(std::string_view path) const {
    return "http://" + host_ + ":" + std::to_string(runner_.port()) + std::string(path);
}

void TargetServer::dispatch(const httplib::Request& req, httplib::Response& res, bool sleeper) {
    std::int64_t arrival_epoch = metrics::epoch_now_ms();
    auto arrival_mark = metrics::Clock::now();

    bool cold;
    {
        std::lock_guard lock(state_.mutex);
        cold = !state_.ever_invoked ||
               arrival_epoch - state_.last_invocation_epoch_ms > config_.warm_window_ms;
        state_.ever_invoked = true;
    }
    if (cold && config_.cold_start_delay_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(config_.cold_start_delay_ms));
    }

    auto finish = [this](httplib::Response& r) {
        std::lock_guard lock(state_.mutex);
        state_.last_invocation_epoch_ms = metrics::epoch_now_ms();
        (void)r;
    };

    RequestEnvelope env;
    try {
        env = protocol::decode_request(req.body);
    } catch (const protocol::CodecError&) {
        ResponseEnvelope err;
        err.target_start_time = arrival_epoch;
        err.target_stop_time = metrics::epoch_now_ms();
        err.target_run_time = metrics::hr_elapsed(arrival_mark, metrics::Clock::now());
        err.workload_result = "";
        err.set_extra("target_error", "malformed request");
        res.status = 400;
        res.set_content(protocol::encode_response(err), "application/json");
        finish(res);
        return;
    }

    auto cancel = std::make_shared<CancelToken>();
    std::promise<ResponseEnvelope> promise;
    auto future = promise.get_future();
    std::thread([env, cancel, sleeper, p = std::move(promise)]() mutable {
        try {
            p.set_value(sleeper ? handle_sleep(env, cancel) : handle_wordcount(env));
        } catch (...) {
            p.set_exception(std::current_exception());
        }
    }).detach();

    auto deadline = std::chrono::milliseconds(config_.execution_limit_ms + kWatchdogGraceMs);
    if (future.wait_for(deadline) != std::future_status::ready) {
        cancel->cancel();
        ResponseEnvelope timeout;
        timeout.target_start_time = arrival_epoch;
        timeout.target_stop_time = metrics::epoch_now_ms();
        timeout.target_run_time = metrics::hr_elapsed(arrival_mark, metrics::Clock::now());
        timeout.workload_result = "";
        timeout.set_extra("target_gateway_error", "execution limit exceeded");
        res.status = 504;
        res.set_content(protocol::encode_response(timeout), "application/json");
        finish(res);
        return;
    }

    ResponseEnvelope reply = future.get();
    res.status = reply.find_extra("target_error") ? 400 : 200;
    if (res.status == 200 && config_.header_echo) {
        res.set_header("X-Workload-Echo", env.workload_data);
    }
    res.set_content(protocol::encode_response(reply), "application/json");
    finish(res);
}

}  // namespace faasbench::targets
