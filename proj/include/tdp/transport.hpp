#pragma once

#include "tdp/proto.hpp"

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace tdp {

class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The link to a worker closed.
class WorkerDisconnected : public TransportError {
public:
  explicit WorkerDisconnected(std::size_t worker)
      : TransportError("worker " + std::to_string(worker) + " disconnected"),
        worker_(worker) {}
  std::size_t worker() const { return worker_; }

private:
  std::size_t worker_;
};

/// Worker end of a coordinator link.
class WorkerChannel {
public:
  virtual ~WorkerChannel() = default;
  virtual void send(const Message &m) = 0;
  /// Blocks until a message arrives.
  virtual Message recv() = 0;
  /// Returns a message only if one is already available.
  virtual std::optional<Message> try_recv() = 0;
};

/// Coordinator end: one link per worker, multiplexed into a single inbox.
class CoordinatorChannel {
public:
  virtual ~CoordinatorChannel() = default;
  virtual std::size_t num_workers() const = 0;
  virtual void send(std::size_t worker, const Message &m) = 0;
  /// Blocks until any worker's message arrives; returns (worker, message).
  virtual std::pair<std::size_t, Message> recv() = 0;
};

/// Blocking FIFO of encoded frames.
template <typename T> class BlockingQueue {
public:
  void push(T v) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      items_.push_back(std::move(v));
    }
    cv_.notify_one();
  }
  T pop() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return !items_.empty(); });
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }
  std::optional<T> try_pop() {
    std::lock_guard<std::mutex> lock(mu_);
    if (items_.empty())
      return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

using Frame = std::vector<std::uint8_t>;

/// Inbound entry at the coordinator; a missing frame means the link closed.
struct InboxEntry {
  std::size_t worker = 0;
  std::optional<Frame> frame;
};

/// In-process links. Messages travel as encoded frames, exactly as they
/// would over a socket.
class InProcessHub {
public:
  explicit InProcessHub(std::size_t workers);
  ~InProcessHub();

  CoordinatorChannel &coordinator();
  WorkerChannel &worker(std::size_t i);
  /// Reports worker `i`'s link as closed to the coordinator.
  void close_worker(std::size_t i);

private:
  class CoordEnd;
  class WorkerEnd;

  BlockingQueue<InboxEntry> inbox_;
  std::vector<std::unique_ptr<BlockingQueue<Frame>>> outboxes_;
  std::unique_ptr<CoordEnd> coord_;
  std::vector<std::unique_ptr<WorkerEnd>> workers_;
};

//===----------------------------------------------------------------------===//
// TCP
//===----------------------------------------------------------------------===//

/// Listening socket on 127.0.0.1 (or any address) for worker connections.
class TcpListener {
public:
  /// Port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port = 0,
                       const std::string &host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener &) = delete;
  TcpListener &operator=(const TcpListener &) = delete;

  std::uint16_t port() const { return port_; }

  /// Accepts `workers` connections; worker ids follow accept order.
  std::unique_ptr<CoordinatorChannel> accept_workers(std::size_t workers);

private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Connects to a coordinator at host:port.
std::unique_ptr<WorkerChannel> tcp_connect(const std::string &host,
                                           std::uint16_t port);

//===----------------------------------------------------------------------===//
// Delivery-order recording and replay
//===----------------------------------------------------------------------===//

/// Everything needed to reproduce one threads-mode run: the order in which
/// the coordinator received messages, and for each worker the
/// (region, step) points at which it picked up a message mid-region.
struct Schedule {
  std::vector<std::size_t> coordinator;
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> workers;

  std::string serialize() const;
  static Schedule parse(const std::string &text);
  bool operator==(const Schedule &) const = default;
};

/// Logs the sender of every message the coordinator receives.
class RecordingCoordinatorChannel : public CoordinatorChannel {
public:
  RecordingCoordinatorChannel(CoordinatorChannel &inner,
                              std::vector<std::size_t> &log)
      : inner_(inner), log_(log) {}
  std::size_t num_workers() const override { return inner_.num_workers(); }
  void send(std::size_t w, const Message &m) override { inner_.send(w, m); }
  std::pair<std::size_t, Message> recv() override;

private:
  CoordinatorChannel &inner_;
  std::vector<std::size_t> &log_;
};

/// Delivers messages in a recorded sender order, holding back early
/// arrivals from other workers. Per-worker FIFO order is preserved.
class ReplayCoordinatorChannel : public CoordinatorChannel {
public:
  ReplayCoordinatorChannel(CoordinatorChannel &inner,
                           std::vector<std::size_t> order);
  std::size_t num_workers() const override { return inner_.num_workers(); }
  void send(std::size_t w, const Message &m) override { inner_.send(w, m); }
  std::pair<std::size_t, Message> recv() override;

private:
  CoordinatorChannel &inner_;
  std::vector<std::size_t> order_;
  std::size_t next_ = 0;
  std::vector<std::deque<Message>> held_;
  std::deque<std::size_t> held_order_;
};

} // namespace tdp
