#include "moma/udp.hpp"

#include "moma/error.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace moma {

namespace {

int open_socket() {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0)
        throw Error(std::string("cannot create UDP socket: ") + std::strerror(errno));
    return fd;
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1)
        return addr;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
        throw Error("cannot resolve host '" + host + "'");
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
    return addr;
}

} // namespace

UdpSocket::UdpSocket() : fd_(open_socket()) {}

UdpSocket UdpSocket::bind(std::uint16_t port, const std::string& host) {
    UdpSocket s(open_socket());
    const sockaddr_in addr = resolve(host, port);
    if (::bind(s.fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
        throw Error("cannot bind UDP " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
    return s;
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

UdpSocket::~UdpSocket() {
    if (fd_ >= 0)
        ::close(fd_);
}

std::uint16_t UdpSocket::local_port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        throw Error(std::string("getsockname failed: ") + std::strerror(errno));
    return ntohs(addr.sin_port);
}

bool UdpSocket::send_to(const std::string& host, std::uint16_t port, std::span<const std::uint8_t> data) {
    sockaddr_in addr;
    try {
        addr = resolve(host, port);
    } catch (const Error&) {
        return false;
    }
    const auto n = ::sendto(fd_, data.data(), data.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
    return n == static_cast<ssize_t>(data.size());
}

std::optional<std::vector<std::uint8_t>> UdpSocket::receive(std::chrono::milliseconds timeout) {
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (ready <= 0)
        return std::nullopt;
    std::vector<std::uint8_t> buf(65536);
    const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0)
        return std::nullopt;
    buf.resize(static_cast<std::size_t>(n));
    return buf;
}

void UdpSocket::set_receive_buffer(int bytes) {
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &bytes, sizeof bytes);
}

} // namespace moma
