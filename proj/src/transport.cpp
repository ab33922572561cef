#include "respmon/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "respmon/session.hpp"

namespace respmon::net {

namespace {

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

struct TimedChunk {
    uint32_t clock_ms = 0;
    std::vector<uint8_t> bytes;
};

// Single-producer single-consumer ordered queue.
class ChunkQueue {
public:
    void push(TimedChunk c) {
        {
            std::lock_guard lk(m_);
            q_.push_back(std::move(c));
        }
        cv_.notify_one();
    }
    void close() {
        {
            std::lock_guard lk(m_);
            closed_ = true;
        }
        cv_.notify_one();
    }
    std::optional<TimedChunk> pop() {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] { return !q_.empty() || closed_; });
        if (q_.empty()) return std::nullopt;
        TimedChunk c = std::move(q_.front());
        q_.pop_front();
        return c;
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    std::deque<TimedChunk> q_;
    bool closed_ = false;
};

}  // namespace

Socket& Socket::operator=(Socket&& o) noexcept {
    if (this != &o) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
}

Socket::~Socket() {
    if (fd_ >= 0) ::close(fd_);
}

void Socket::send_all(std::span<const uint8_t> bytes) {
    size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EPIPE || errno == ECONNRESET) throw BrokenPipe(errno_text("send"));
            throw IoError(errno_text("send"));
        }
        sent += static_cast<size_t>(n);
    }
}

size_t Socket::receive(std::span<uint8_t> buf) {
    for (;;) {
        const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
        if (n >= 0) return static_cast<size_t>(n);
        if (errno == EINTR) continue;
        if (errno == ECONNRESET) return 0;
        throw IoError(errno_text("recv"));
    }
}

void Socket::shutdown_write() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

Socket connect_tcp(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
        throw IoError("resolve " + host + ": " + ::gai_strerror(rc));

    int last_errno = 0;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (!s.valid()) {
            last_errno = errno;
            continue;
        }
        if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
            ::freeaddrinfo(res);
            return s;
        }
        last_errno = errno;
    }
    ::freeaddrinfo(res);
    const std::string where = host + ":" + service;
    if (last_errno == ECONNREFUSED) throw ConnectionRefused("connection refused by " + where);
    throw IoError("connect " + where + ": " + std::strerror(last_errno));
}

Listener::Listener(uint16_t port, const std::string& host) : sock_(::socket(AF_INET, SOCK_STREAM, 0)) {
    if (!sock_.valid()) throw IoError(errno_text("socket"));
    const int one = 1;
    ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw IoError("listen address must be an IPv4 literal: " + host);
    if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw IoError(errno_text("bind"));
    if (::listen(sock_.fd(), 1) != 0) throw IoError(errno_text("listen"));
    socklen_t len = sizeof addr;
    ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

Socket Listener::accept() {
    for (;;) {
        const int fd = ::accept(sock_.fd(), nullptr, nullptr);
        if (fd >= 0) return Socket(fd);
        if (errno != EINTR) throw IoError(errno_text("accept"));
    }
}

std::pair<std::string, uint16_t> parse_address(const std::string& addr) {
    std::string host = "127.0.0.1";
    std::string port_text = addr;
    if (const auto colon = addr.rfind(':'); colon != std::string::npos) {
        if (colon > 0) host = addr.substr(0, colon);
        port_text = addr.substr(colon + 1);
    }
    try {
        size_t used = 0;
        const unsigned long p = std::stoul(port_text, &used);
        if (used != port_text.size() || p > 65535) throw std::out_of_range("port");
        return {host, static_cast<uint16_t>(p)};
    } catch (const std::exception&) {
        throw InvalidParameter("bad address '" + addr + "' (expected host:port)");
    }
}

StreamReport stream_session(const SessionConfig& cfg, const std::string& host, uint16_t port,
                            double speed) {
    if (!(speed > 0.0)) throw InvalidParameter("speed must be > 0");
    Socket sock = connect_tcp(host, port);

    ChunkQueue queue;
    std::exception_ptr producer_error;
    std::thread producer([&] {
        try {
            simulate(cfg, [&](const wire::TelemetryFrame& f, uint32_t clock_ms) {
                queue.push({clock_ms, wire::encode(f)});
            });
        } catch (...) {
            producer_error = std::current_exception();
        }
        queue.close();
    });

    StreamReport report;
    const auto start = std::chrono::steady_clock::now();
    try {
        while (auto chunk = queue.pop()) {
            const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                         std::chrono::duration<double, std::milli>(chunk->clock_ms / speed));
            std::this_thread::sleep_until(due);
            sock.send_all(chunk->bytes);
            ++report.frames_sent;
            report.bytes_sent += chunk->bytes.size();
        }
    } catch (...) {
        // Drain so the producer can finish, then rethrow.
        while (queue.pop()) {
        }
        producer.join();
        throw;
    }
    producer.join();
    if (producer_error) std::rethrow_exception(producer_error);
    sock.shutdown_write();
    report.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ReceiveReport receive_session(Listener& listener, const std::filesystem::path& out) {
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write '" + out.string() + "'");
    Socket conn = listener.accept();

    ReceiveReport report;
    wire::StreamSplitter splitter;
    std::vector<uint8_t> buf(4096);
    for (;;) {
        const size_t n = conn.receive(buf);
        if (n == 0) break;
        file.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n));
        file.flush();
        report.bytes += n;
        report.frames += splitter.feed(std::span<const uint8_t>(buf.data(), n)).size();
    }
    if (!file) throw IoError("write failed for '" + out.string() + "'");
    report.resyncs = splitter.resyncs().size();
    report.pending_bytes = splitter.pending_bytes();
    return report;
}

}  // namespace respmon::net
