#include "tdp/transport.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace tdp {

namespace {

[[noreturn]] void sys_fail(const std::string &what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::uint8_t *p, std::size_t n) {
  while (n > 0) {
    ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR)
        continue;
      sys_fail("send");
    }
    p += k;
    n -= static_cast<std::size_t>(k);
  }
}

/// Owns one connected socket and splits its byte stream into frames.
class Stream {
public:
  explicit Stream(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~Stream() {
    if (fd_ >= 0)
      ::close(fd_);
  }
  Stream(const Stream &) = delete;
  Stream &operator=(const Stream &) = delete;

  int fd() const { return fd_; }

  void send(const Message &m) {
    Frame f = encode(m);
    std::lock_guard<std::mutex> lock(write_mu_);
    write_all(fd_, f.data(), f.size());
  }

  /// Blocks for the next frame; nullopt on orderly close.
  std::optional<Frame> read_frame() {
    for (;;) {
      if (auto f = asm_.next_frame())
        return f;
      if (!fill())
        return std::nullopt;
    }
  }

  /// Frame if one is buffered or readable without blocking.
  std::optional<Frame> poll_frame() {
    if (auto f = asm_.next_frame())
      return f;
    for (;;) {
      pollfd p{fd_, POLLIN, 0};
      int r = ::poll(&p, 1, 0);
      if (r < 0) {
        if (errno == EINTR)
          continue;
        sys_fail("poll");
      }
      if (r == 0)
        return std::nullopt;
      if (!fill())
        throw TransportError("coordinator closed the connection");
      if (auto f = asm_.next_frame())
        return f;
    }
  }

  void shutdown() { ::shutdown(fd_, SHUT_RDWR); }

private:
  bool fill() {
    std::uint8_t buf[4096];
    for (;;) {
      ssize_t k = ::recv(fd_, buf, sizeof buf, 0);
      if (k < 0) {
        if (errno == EINTR)
          continue;
        if (errno == ECONNRESET)
          return false;
        sys_fail("recv");
      }
      if (k == 0)
        return false;
      asm_.feed({buf, static_cast<std::size_t>(k)});
      return true;
    }
  }

  int fd_;
  FrameAssembler asm_;
  std::mutex write_mu_;
};

class TcpWorkerChannel : public WorkerChannel {
public:
  explicit TcpWorkerChannel(int fd) : stream_(fd) {}
  void send(const Message &m) override { stream_.send(m); }
  Message recv() override {
    auto f = stream_.read_frame();
    if (!f)
      throw TransportError("coordinator closed the connection");
    return decode(*f);
  }
  std::optional<Message> try_recv() override {
    auto f = stream_.poll_frame();
    if (!f)
      return std::nullopt;
    return decode(*f);
  }

private:
  Stream stream_;
};

class TcpCoordinatorChannel : public CoordinatorChannel {
public:
  explicit TcpCoordinatorChannel(std::vector<int> fds) {
    for (int fd : fds)
      streams_.push_back(std::make_unique<Stream>(fd));
    for (std::size_t i = 0; i < streams_.size(); ++i)
      readers_.emplace_back([this, i] { read_loop(i); });
  }

  ~TcpCoordinatorChannel() override {
    for (auto &s : streams_)
      s->shutdown();
    for (auto &t : readers_)
      t.join();
  }

  std::size_t num_workers() const override { return streams_.size(); }

  void send(std::size_t worker, const Message &m) override {
    if (worker >= streams_.size())
      throw TransportError("no such worker " + std::to_string(worker));
    streams_[worker]->send(m);
  }

  std::pair<std::size_t, Message> recv() override {
    InboxEntry e = inbox_.pop();
    if (!e.frame)
      throw WorkerDisconnected(e.worker);
    return {e.worker, decode(*e.frame)};
  }

private:
  void read_loop(std::size_t i) {
    try {
      while (auto f = streams_[i]->read_frame())
        inbox_.push({i, std::move(*f)});
    } catch (const std::exception &) {
    }
    inbox_.push({i, std::nullopt});
  }

  std::vector<std::unique_ptr<Stream>> streams_;
  std::vector<std::thread> readers_;
  BlockingQueue<InboxEntry> inbox_;
};

sockaddr_in make_addr(const std::string &host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw TransportError("bad IPv4 address '" + host + "'");
  return addr;
}

} // namespace

TcpListener::TcpListener(std::uint16_t port, const std::string &host) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0)
    sys_fail("socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = make_addr(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr *>(&addr), sizeof addr) < 0) {
    int saved = errno;
    ::close(fd_);
    errno = saved;
    sys_fail("bind");
  }
  if (::listen(fd_, 64) < 0)
    sys_fail("listen");
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len) < 0)
    sys_fail("getsockname");
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0)
    ::close(fd_);
}

std::unique_ptr<CoordinatorChannel>
TcpListener::accept_workers(std::size_t workers) {
  std::vector<int> fds;
  try {
    while (fds.size() < workers) {
      int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
      if (fd < 0) {
        if (errno == EINTR)
          continue;
        sys_fail("accept");
      }
      fds.push_back(fd);
    }
  } catch (...) {
    for (int fd : fds)
      ::close(fd);
    throw;
  }
  return std::make_unique<TcpCoordinatorChannel>(std::move(fds));
}

std::unique_ptr<WorkerChannel> tcp_connect(const std::string &host,
                                           std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0)
    sys_fail("socket");
  sockaddr_in addr = make_addr(host, port);
  for (;;) {
    if (::connect(fd, reinterpret_cast<sockaddr *>(&addr), sizeof addr) == 0)
      break;
    if (errno == EINTR)
      continue;
    int saved = errno;
    ::close(fd);
    errno = saved;
    sys_fail("connect to " + host + ":" + std::to_string(port));
  }
  return std::make_unique<TcpWorkerChannel>(fd);
}

} // namespace tdp
