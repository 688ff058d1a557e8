#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "hydroloop/frame.hpp"
#include "hydroloop/netsim.hpp"

// Two-process topology: the plant serves measurements over TCP and applies
// the freshest command; the remote controller answers each measurement.
namespace hydroloop::netsim {

/// Owning POSIX socket descriptor.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    Socket(Socket&& other) noexcept;
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    void close() noexcept;
    void shutdown() noexcept;

private:
    int fd_ = -1;
};

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
};

// "host:port"; a bare port means 127.0.0.1.
Endpoint parse_endpoint(const std::string& text);

Socket listen_tcp(const Endpoint& at);
std::uint16_t local_port(const Socket& s);
Socket connect_tcp(const Endpoint& to);

void send_frame(const Socket& s, const Frame& f);
enum class RecvStatus { frame, closed, timeout };
// Blocks up to `timeout` for one complete frame.
RecvStatus recv_frame(const Socket& s, Frame& out, std::chrono::milliseconds timeout);

struct RttRecord {
    std::uint64_t sequence;
    double rtt;  // [s]
};

class PlantServer {
public:
    PlantServer(Scenario scenario, const plant::TruthPlant& plant, double deadzone);

    // Binds and listens; returns the bound port (useful with port 0).
    std::uint16_t bind(const Endpoint& at);
    // Accepts one controller, runs the scenario in wall-clock time and returns
    // the trace. The valve command falls back to 0 if the peer disconnects.
    SimTrace serve(std::chrono::milliseconds accept_timeout = std::chrono::milliseconds(10000));

    const std::vector<RttRecord>& rtt_log() const noexcept { return rtts_; }

private:
    Scenario scenario_;
    plant::TruthPlant plant_;
    double deadzone_;
    Socket listener_;
    std::vector<RttRecord> rtts_;
};

struct ClientStats {
    std::uint64_t received = 0;
    std::uint64_t stale = 0;
    std::uint64_t commands = 0;
};

/// Event-driven controller: one command per fresh measurement, echoing its
/// sequence and timestamp. Throws NetworkError on timeout or connect failure.
class ControllerClient {
public:
    ControllerClient(const twodof::TwoDofConfig& cfg, const twodof::SetpointFilter& sp, ReferenceProfile reference,
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(1000));

    ClientStats run(const Endpoint& server);
    // Same loop over an already connected stream.
    ClientStats run(const Socket& stream);

private:
    twodof::Controller controller_;
    double deadzone_;
    ReferenceProfile reference_;
    std::chrono::milliseconds timeout_;
};

}  // namespace hydroloop::netsim
