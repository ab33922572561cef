#pragma once

// TCP byte-stream transport standing in for the BLE link. The device side is
// the client, the host side listens.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>

#include "respmon/errors.hpp"
#include "respmon/session_config.hpp"
#include "respmon/wire.hpp"

namespace respmon::net {

class ConnectionRefused : public IoError {
public:
    using IoError::IoError;
};

class BrokenPipe : public IoError {
public:
    using IoError::IoError;
};

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

    void send_all(std::span<const uint8_t> bytes);           // throws BrokenPipe
    size_t receive(std::span<uint8_t> buf);                   // 0 on orderly close
    void shutdown_write();

private:
    int fd_ = -1;
};

Socket connect_tcp(const std::string& host, uint16_t port);  // throws ConnectionRefused / IoError

class Listener {
public:
    // port 0 picks an ephemeral port.
    explicit Listener(uint16_t port, const std::string& host = "127.0.0.1");
    uint16_t port() const { return port_; }
    Socket accept();

private:
    Socket sock_;
    uint16_t port_ = 0;
};

// "host:port" or ":port"/"port" (host defaults to 127.0.0.1).
std::pair<std::string, uint16_t> parse_address(const std::string& addr);  // throws InvalidParameter

struct StreamReport {
    uint64_t frames_sent = 0;
    uint64_t bytes_sent = 0;
    double wall_s = 0.0;
};

// Runs the emulator on a producer thread and sends each frame when its device
// timestamp comes due, compressed by `speed`. Partial batches are flushed
// before the connection is closed.
StreamReport stream_session(const SessionConfig& cfg, const std::string& host, uint16_t port,
                            double speed);

struct ReceiveReport {
    uint64_t bytes = 0;
    uint64_t frames = 0;
    uint64_t resyncs = 0;
    size_t pending_bytes = 0;
};

// Accepts one connection and appends everything received to `out` as it
// arrives, until the peer closes.
ReceiveReport receive_session(Listener& listener, const std::filesystem::path& out);

}  // namespace respmon::net
