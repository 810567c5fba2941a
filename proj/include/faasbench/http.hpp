#pragma once

// Header-echo replies can carry the whole workload in one header line, far
// past cpp-httplib's 8 KiB default.
#ifndef CPPHTTPLIB_HEADER_MAX_LENGTH
#define CPPHTTPLIB_HEADER_MAX_LENGTH (8u << 20)
#endif

#include <httplib.h>

#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace faasbench::http {

// Flattens an httplib header multimap into the (name, value) list used for
// size accounting, preserving iteration order.
inline std::vector<std::pair<std::string, std::string>> header_list(const httplib::Headers& headers) {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(headers.size());
    for (const auto& [k, v] : headers) out.emplace_back(k, v);
    return out;
}

class ServerError : public std::runtime_error {
public:
    enum class Kind { Bind, NotReady };

    ServerError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Runs an httplib server on its own thread; readiness is signalled only
// after the listener accepts connections.
class ServerRunner {
public:
    ServerRunner() = default;
    ~ServerRunner() { stop(); }
    ServerRunner(const ServerRunner&) = delete;
    ServerRunner& operator=(const ServerRunner&) = delete;

    // Binds (port 0 picks an ephemeral port) and returns the bound port.
    int start(httplib::Server& server, const std::string& host, int port) {
        server_ = &server;
        // REUSEADDR only; the library default adds REUSEPORT, which would let
        // a second server silently share an occupied port.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                       reinterpret_cast<const char*>(&yes), sizeof(yes));
        });
        int bound = port;
        if (port == 0) {
            bound = server.bind_to_any_port(host);
            if (bound <= 0) throw ServerError(ServerError::Kind::Bind, "bind failed on " + host);
        } else if (!server.bind_to_port(host, port)) {
            throw ServerError(ServerError::Kind::Bind,
                              "bind failed on " + host + ":" + std::to_string(port));
        }
        thread_ = std::thread([&server] { server.listen_after_bind(); });
        server.wait_until_ready();
        port_ = bound;
        return bound;
    }

    int port() const { return port_; }

    void stop() {
        if (server_) {
            server_->stop();
            server_ = nullptr;
        }
        if (thread_.joinable()) thread_.join();
    }

private:
    httplib::Server* server_ = nullptr;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace faasbench::http
