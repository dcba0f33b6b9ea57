#ifndef IMIA_REMOTE_HPP
#define IMIA_REMOTE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "imia/oracle.hpp"

namespace imia {

struct Endpoint {
    std::string host = "127.0.0.1";
    uint16_t port = 0;

    // Parses "host:port".
    static Endpoint parse(const std::string& text);
    std::string str() const;
};

/// Serves a model over TCP, one JSON request per line:
///   {"op":"scores","input":[...]} -> {"ok":true,"scores":[...]}
///   {"op":"label","input":[...]}  -> {"ok":true,"label":n}
///   anything else                 -> {"ok":false,"error":"..."}
/// Floats round-trip exactly (scores are float32 promoted to double, which
/// JSON shortest-form printing preserves). The access level is enforced
/// server-side; gradients are never served. Connections are independent and
/// handled concurrently. Malformed requests get an error response and the
/// connection stays usable.
class OracleServer {
public:
    // port 0 binds an ephemeral port; see port().
    OracleServer(const Network& net, AccessLevel level, const Endpoint& bind_to);
    ~OracleServer();

    OracleServer(const OracleServer&) = delete;
    OracleServer& operator=(const OracleServer&) = delete;

    uint16_t port() const { return port_; }
    Endpoint endpoint() const { return {host_, port_}; }
    OracleStats stats() const { return oracle_->stats(); }

    // Idempotent; joins all connection threads.
    void stop();

private:
    void accept_loop();
    void serve_connection(int fd);
    std::string handle_line(const std::string& line);

    std::unique_ptr<LocalOracle> oracle_;
    size_t input_numel_;
    std::vector<size_t> input_shape_;
    std::string host_;
    uint16_t port_ = 0;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex stop_mu_;
    std::mutex conn_mu_;
    std::vector<std::thread> conn_threads_;
};

/// Connects to a served oracle. The access level shapes client-side checks;
/// the server independently enforces its own. Gradient queries always raise
/// AccessViolation (white-box implies local possession of the model).
/// Thread-safe: requests on one connection are serialized by a mutex.
std::unique_ptr<ModelOracle> connect_oracle(const Endpoint& endpoint, AccessLevel level,
                                            QueryBudget budget = {});

} // namespace imia

#endif
