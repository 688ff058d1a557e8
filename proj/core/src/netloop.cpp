#include "hydroloop/netloop.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "hydroloop/error.hpp"

namespace hydroloop::netsim {

using Clock = std::chrono::steady_clock;

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

Socket::~Socket() { close(); }

void Socket::close() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void Socket::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw NetworkError(what + ": " + std::strerror(errno)); }

sockaddr_in resolve(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res); rc != 0 || res == nullptr)
        throw NetworkError("cannot resolve '" + ep.host + "': " + ::gai_strerror(rc));
    sockaddr_in addr{};
    std::memcpy(&addr, res->ai_addr, sizeof addr);
    ::freeaddrinfo(res);
    addr.sin_port = htons(ep.port);
    return addr;
}

void set_nodelay(const Socket& s) {
    const int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
    Endpoint ep;
    const auto colon = text.rfind(':');
    const std::string port = colon == std::string::npos ? text : text.substr(colon + 1);
    if (colon != std::string::npos && colon > 0) ep.host = text.substr(0, colon);
    try {
        std::size_t used = 0;
        const unsigned long p = std::stoul(port, &used);
        if (used != port.size() || p > 65535) throw std::out_of_range("port");
        ep.port = static_cast<std::uint16_t>(p);
    } catch (const std::exception&) {
        throw ValidationError("invalid address '" + text + "' (expected host:port)");
    }
    return ep;
}

Socket listen_tcp(const Endpoint& at) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("socket");
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    const sockaddr_in addr = resolve(at);
    if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
        fail("bind " + at.host + ":" + std::to_string(at.port));
    if (::listen(s.fd(), 1) != 0) fail("listen");
    return s;
}

std::uint16_t local_port(const Socket& s) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) fail("getsockname");
    return ntohs(addr.sin_port);
}

Socket connect_tcp(const Endpoint& to) {
    const sockaddr_in addr = resolve(to);
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("socket");
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
        fail("connect " + to.host + ":" + std::to_string(to.port));
    set_nodelay(s);
    return s;
}

void send_frame(const Socket& s, const Frame& f) {
    const auto bytes = encode(f);
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(s.fd(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        sent += static_cast<std::size_t>(n);
    }
}

RecvStatus recv_frame(const Socket& s, Frame& out, std::chrono::milliseconds timeout) {
    std::array<std::byte, Frame::wire_size> buf{};
    std::size_t got = 0;
    const auto deadline = Clock::now() + timeout;
    while (got < buf.size()) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        pollfd pfd{s.fd(), POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(std::max<std::int64_t>(left.count(), 0)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            fail("poll");
        }
        if (rc == 0) return RecvStatus::timeout;
        const ssize_t n = ::recv(s.fd(), buf.data() + got, buf.size() - got, 0);
        if (n == 0) return RecvStatus::closed;
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            if (errno == ECONNRESET) return RecvStatus::closed;
            fail("recv");
        }
        got += static_cast<std::size_t>(n);
    }
    out = decode(buf);
    return RecvStatus::frame;
}

PlantServer::PlantServer(Scenario scenario, const plant::TruthPlant& plant, double deadzone)
    : scenario_(std::move(scenario)), plant_(plant), deadzone_(deadzone) {
    scenario_.validate();
}

std::uint16_t PlantServer::bind(const Endpoint& at) {
    listener_ = listen_tcp(at);
    return local_port(listener_);
}

SimTrace PlantServer::serve(std::chrono::milliseconds accept_timeout) {
    if (!listener_.valid()) throw NetworkError("plant server: bind() must be called before serve()");
    pollfd pfd{listener_.fd(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(accept_timeout.count()));
    if (rc <= 0) throw NetworkError("plant server: no controller connected within the accept timeout");
    Socket conn(::accept(listener_.fd(), nullptr, nullptr));
    if (!conn.valid()) fail("accept");
    set_nodelay(conn);

    const auto spt = static_cast<std::uint64_t>(scenario_.steps_per_tick());
    const std::uint64_t ticks = scenario_.ticks();
    const double dt = scenario_.plant_dt;

    std::mutex mu;
    FreshestRegister<std::uint64_t, double> command;
    std::vector<Clock::time_point> emitted(ticks + 1);
    double last_rtt = 0.0;
    std::atomic<bool> stop{false};
    std::atomic<bool> peer_gone{false};
    rtts_.clear();

    std::thread receiver([&] {
        Frame f;
        while (!stop.load()) {
            RecvStatus st;
            try {
                st = recv_frame(conn, f, std::chrono::milliseconds(100));
            } catch (const Error&) {
                st = RecvStatus::closed;
            }
            if (st == RecvStatus::timeout) continue;
            if (st == RecvStatus::closed) {
                peer_gone.store(true);
                return;
            }
            if (f.kind != FrameKind::command) continue;
            const auto arrival = Clock::now();
            std::lock_guard lock(mu);
            if (f.sequence <= ticks && emitted[f.sequence] != Clock::time_point{}) {
                last_rtt = std::chrono::duration<double>(arrival - emitted[f.sequence]).count();
                rtts_.push_back({f.sequence, last_rtt});
            }
            command.offer(f.sequence, f.value);
        }
    });

    SimTrace trace;
    plant::PlantState state = scenario_.initial;
    const auto start = Clock::now();
    const auto step_period = std::chrono::duration<double>(dt);
    for (std::uint64_t k = 0;; ++k) {
        std::this_thread::sleep_until(start + std::chrono::duration_cast<Clock::duration>(step_period * k));
        if (peer_gone.load()) {
            trace.disconnected = true;
            break;
        }
        double drive = 0.0;
        double rtt = 0.0;
        {
            std::lock_guard lock(mu);
            drive = command.has_value() ? command.value() : 0.0;
            rtt = last_rtt;
        }
        if (k % spt == 0) {
            const std::uint64_t n = k / spt;
            const double t = static_cast<double>(n) * scenario_.Ts;
            trace.rows.push_back({t, scenario_.reference.at(t), state.x, state.v, state.p_load,
                                  plant::apply_valve(drive, {deadzone_}), rtt});
            {
                std::lock_guard lock(mu);
                emitted[n] = Clock::now();
            }
            try {
                send_frame(conn, {FrameKind::measurement, n, t, state.x});
            } catch (const NetworkError&) {
                trace.disconnected = true;
                break;
            }
            if (n == ticks) break;
        }
        try {
            state = plant::plant_step(state, drive, dt, plant_, static_cast<double>(k) * dt);
        } catch (const IntegrationError& e) {
            trace.fault = true;
            trace.fault_time = e.time();
            trace.fault_message = e.what();
            break;
        }
    }
    stop.store(true);
    conn.shutdown();
    receiver.join();
    return trace;
}

ControllerClient::ControllerClient(const twodof::TwoDofConfig& cfg, const twodof::SetpointFilter& sp,
                                   ReferenceProfile reference, std::chrono::milliseconds timeout)
    : controller_(cfg, sp), deadzone_(cfg.deadzone), reference_(std::move(reference)), timeout_(timeout) {}

ClientStats ControllerClient::run(const Endpoint& server) {
    const auto deadline = Clock::now() + timeout_;
    Socket s;
    while (!s.valid()) {
        try {
            s = connect_tcp(server);
        } catch (const NetworkError&) {
            if (Clock::now() >= deadline) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    return run(s);
}

ClientStats ControllerClient::run(const Socket& stream) {
    ClientStats stats;
    FreshestRegister<std::uint64_t, double> last;
    controller_.reset();
    Frame f;
    for (;;) {
        const auto st = recv_frame(stream, f, timeout_);
        if (st == RecvStatus::timeout)
            throw NetworkError("controller: no measurement within " + std::to_string(timeout_.count()) + " ms");
        if (st == RecvStatus::closed) {
            if (stats.received == 0) throw NetworkError("controller: server closed before sending a measurement");
            return stats;
        }
        if (f.kind != FrameKind::measurement) continue;
        ++stats.received;
        if (!last.offer(f.sequence, f.value)) {
            ++stats.stale;
            continue;
        }
        const double u = controller_.step(reference_.at(f.timestamp), f.value);
        const double drive = twodof::inverse_deadzone(u, deadzone_);
        try {
            send_frame(stream, {FrameKind::command, f.sequence, f.timestamp, drive});
        } catch (const NetworkError&) {
            return stats;
        }
        ++stats.commands;
    }
}

}  // namespace hydroloop::netsim
