#include "imia/remote.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <mutex>

#include <json.hpp>

#include "imia/errors.hpp"

namespace imia {

namespace {

using nlohmann::json;

constexpr size_t kMaxLineBytes = 1 << 24;

// Writes the whole buffer; throws IoError on a closed/broken peer.
void send_all(int fd, const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) throw IoError("socket send failed");
        off += size_t(n);
    }
}

struct SockAddr {
    sockaddr_in addr{};

    SockAddr(const std::string& host, uint16_t port) {
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            if (host == "localhost") {
                ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
            } else {
                throw IoError("cannot resolve host '" + host + "' (IPv4 literals only)");
            }
        }
    }
};

// Accumulates received bytes and yields complete '\n'-terminated lines.
class LineReader {
public:
    explicit LineReader(int fd) : fd_(fd) {}

    // Returns false on orderly shutdown or stop request.
    bool next_line(std::string& line, const std::atomic<bool>* stop_flag = nullptr);

private:
    int fd_;
    std::string buf_;
};

bool LineReader::next_line(std::string& line, const std::atomic<bool>* stop_flag) {
    while (true) {
        const size_t pos = buf_.find('\n');
        if (pos != std::string::npos) {
            line = buf_.substr(0, pos);
            buf_.erase(0, pos + 1);
            return true;
        }
        if (buf_.size() > kMaxLineBytes) throw IoError("oversized protocol line");
        if (stop_flag) {
            pollfd pfd{fd_, POLLIN, 0};
            const int pr = ::poll(&pfd, 1, 200);
            if (stop_flag->load()) return false;
            if (pr == 0) continue;
            if (pr < 0) return false;
        }
        char chunk[4096];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n <= 0) return false;
        buf_.append(chunk, size_t(n));
    }
}

} // namespace

Endpoint Endpoint::parse(const std::string& text) {
    const size_t colon = text.find_last_of(':');
    if (colon == std::string::npos || colon + 1 >= text.size()) {
        throw ConfigError("endpoint must be host:port, got '" + text + "'");
    }
    Endpoint ep;
    ep.host = text.substr(0, colon);
    try {
        const int port = std::stoi(text.substr(colon + 1));
        if (port < 0 || port > 65535) throw std::out_of_range("port");
        ep.port = uint16_t(port);
    } catch (const std::exception&) {
        throw ConfigError("invalid port in endpoint '" + text + "'");
    }
    return ep;
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

OracleServer::OracleServer(const Network& net, AccessLevel level, const Endpoint& bind_to)
    : oracle_(std::make_unique<LocalOracle>(net, level)),
      input_numel_(shape_numel(net.spec().input_shape)),
      input_shape_(net.spec().input_shape),
      host_(bind_to.host) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError("cannot create server socket");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    SockAddr sa(bind_to.host, bind_to.port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa.addr), sizeof sa.addr) < 0) {
        ::close(listen_fd_);
        throw IoError("cannot bind " + bind_to.str());
    }
    if (::listen(listen_fd_, 64) < 0) {
        ::close(listen_fd_);
        throw IoError("cannot listen on " + bind_to.str());
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);

    accept_thread_ = std::thread([this] { accept_loop(); });
}

OracleServer::~OracleServer() { stop(); }

void OracleServer::stop() {
    stopping_.store(true);
    std::lock_guard<std::mutex> stop_lock(stop_mu_);
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard<std::mutex> lock(conn_mu_);
    for (std::thread& t : conn_threads_) {
        if (t.joinable()) t.join();
    }
    conn_threads_.clear();
}

void OracleServer::accept_loop() {
    while (!stopping_.load()) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int pr = ::poll(&pfd, 1, 200);
        if (pr <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        std::lock_guard<std::mutex> lock(conn_mu_);
        conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
    }
    ::close(listen_fd_);
    listen_fd_ = -1;
}

void OracleServer::serve_connection(int fd) {
    LineReader reader(fd);
    std::string line;
    try {
        while (!stopping_.load() && reader.next_line(line, &stopping_)) {
            send_all(fd, handle_line(line) + "\n");
        }
    } catch (const IoError&) {
        // peer went away or misbehaved irrecoverably; drop the connection
    }
    ::close(fd);
}

std::string OracleServer::handle_line(const std::string& line) {
    json resp;
    try {
        const json req = json::parse(line);
        const std::string op = req.at("op").get<std::string>();
        const std::vector<float> flat = req.at("input").get<std::vector<float>>();
        if (flat.size() != input_numel_) {
            throw std::invalid_argument("bad request: input has " +
                                        std::to_string(flat.size()) + " values, model needs " +
                                        std::to_string(input_numel_));
        }
        Tensor input(input_shape_, flat);
        if (op == "scores") {
            const Tensor probs = oracle_->query_scores(input);
            resp["ok"] = true;
            resp["scores"] = probs.values();
        } else if (op == "label") {
            resp["ok"] = true;
            resp["label"] = oracle_->query_label(input);
        } else {
            throw std::invalid_argument("bad request: unknown op '" + op + "'");
        }
    } catch (const AccessViolation& e) {
        resp = json{{"ok", false}, {"error", std::string("access violation: ") + e.what()}};
    } catch (const json::exception& e) {
        resp = json{{"ok", false}, {"error", std::string("bad request: ") + e.what()}};
    } catch (const std::exception& e) {
        resp = json{{"ok", false}, {"error", e.what()}};
    }
    return resp.dump();
}

namespace {

class RemoteOracle final : public ModelOracle {
public:
    RemoteOracle(const Endpoint& endpoint, AccessLevel level, QueryBudget budget)
        : ModelOracle(level, budget) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw IoError("cannot create client socket");
        SockAddr sa(endpoint.host, endpoint.port);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&sa.addr), sizeof sa.addr) < 0) {
            ::close(fd_);
            throw IoError("cannot connect to " + endpoint.str());
        }
        const int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }

    ~RemoteOracle() override {
        if (fd_ >= 0) ::close(fd_);
    }

protected:
    Tensor do_scores(const Tensor& input) override {
        const json resp = round_trip("scores", input);
        return Tensor::from_vector(resp.at("scores").get<std::vector<float>>());
    }

    int do_label(const Tensor& input) override {
        return round_trip("label", input).at("label").get<int>();
    }

    Tensor do_input_gradient(const Tensor&, int) override {
        throw AccessViolation("gradients are never served remotely");
    }

private:
    json round_trip(const char* op, const Tensor& input) {
        json req;
        req["op"] = op;
        req["input"] = input.values();
        std::unique_lock<std::mutex> lock(mu_);
        send_all(fd_, req.dump() + "\n");
        // Responses never interleave: one request in flight per connection.
        std::string line;
        if (!read_line(line)) {
            throw IoError("oracle connection closed");
        }
        lock.unlock();

        json resp;
        try {
            resp = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError(std::string("protocol violation: unparsable response: ") + e.what());
        }
        if (!resp.value("ok", false)) {
            const std::string err = resp.value("error", "unspecified oracle error");
            if (err.rfind("access violation", 0) == 0) throw AccessViolation(err);
            throw IoError("oracle error: " + err);
        }
        return resp;
    }

    bool read_line(std::string& line) {
        while (true) {
            const size_t pos = buf_.find('\n');
            if (pos != std::string::npos) {
                line = buf_.substr(0, pos);
                buf_.erase(0, pos + 1);
                return true;
            }
            if (buf_.size() > kMaxLineBytes) throw IoError("oversized protocol line");
            char chunk[4096];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) return false;
            buf_.append(chunk, size_t(n));
        }
    }

    int fd_ = -1;
    std::mutex mu_;
    std::string buf_;
};

} // namespace

std::unique_ptr<ModelOracle> connect_oracle(const Endpoint& endpoint, AccessLevel level,
                                            QueryBudget budget) {
    if (level == AccessLevel::WhiteBox) {
        throw ConfigError("white-box access cannot be served remotely; use a local oracle");
    }
    return std::make_unique<RemoteOracle>(endpoint, level, budget);
}

} // namespace imia
