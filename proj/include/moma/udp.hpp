#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace moma {

/// IPv4 UDP socket, closed on destruction.
class UdpSocket {
public:
    /// Unbound socket for sending.
    UdpSocket();
    /// Socket bound to `host:port`; port 0 picks a free one. Throws Error when the bind fails.
    static UdpSocket bind(std::uint16_t port, const std::string& host = "127.0.0.1");

    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;
    ~UdpSocket();

    std::uint16_t local_port() const;

    /// False when the datagram could not be sent.
    bool send_to(const std::string& host, std::uint16_t port, std::span<const std::uint8_t> data);

    /// Next datagram, or nullopt after `timeout`.
    std::optional<std::vector<std::uint8_t>> receive(std::chrono::milliseconds timeout);

    /// Grows the kernel receive buffer; best effort.
    void set_receive_buffer(int bytes);

private:
    explicit UdpSocket(int fd) : fd_(fd) {}
    int fd_ = -1;
};

} // namespace moma
