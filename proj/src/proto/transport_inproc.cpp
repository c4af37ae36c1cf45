#include "tdp/transport.hpp"

#include <sstream>

namespace tdp {

class InProcessHub::CoordEnd : public CoordinatorChannel {
public:
  explicit CoordEnd(InProcessHub &hub) : hub_(hub) {}
  std::size_t num_workers() const override { return hub_.outboxes_.size(); }
  void send(std::size_t worker, const Message &m) override {
    if (worker >= hub_.outboxes_.size())
      throw TransportError("no such worker " + std::to_string(worker));
    hub_.outboxes_[worker]->push(encode(m));
  }
  std::pair<std::size_t, Message> recv() override {
    InboxEntry e = hub_.inbox_.pop();
    if (!e.frame)
      throw WorkerDisconnected(e.worker);
    return {e.worker, decode(*e.frame)};
  }

private:
  InProcessHub &hub_;
};

class InProcessHub::WorkerEnd : public WorkerChannel {
public:
  WorkerEnd(InProcessHub &hub, std::size_t id) : hub_(hub), id_(id) {}
  void send(const Message &m) override {
    hub_.inbox_.push({id_, encode(m)});
  }
  Message recv() override { return decode(hub_.outboxes_[id_]->pop()); }
  std::optional<Message> try_recv() override {
    auto f = hub_.outboxes_[id_]->try_pop();
    if (!f)
      return std::nullopt;
    return decode(*f);
  }

private:
  InProcessHub &hub_;
  std::size_t id_;
};

InProcessHub::InProcessHub(std::size_t workers) {
  for (std::size_t i = 0; i < workers; ++i)
    outboxes_.push_back(std::make_unique<BlockingQueue<Frame>>());
  coord_ = std::make_unique<CoordEnd>(*this);
  for (std::size_t i = 0; i < workers; ++i)
    workers_.push_back(std::make_unique<WorkerEnd>(*this, i));
}

InProcessHub::~InProcessHub() = default;

CoordinatorChannel &InProcessHub::coordinator() { return *coord_; }

WorkerChannel &InProcessHub::worker(std::size_t i) { return *workers_.at(i); }

void InProcessHub::close_worker(std::size_t i) {
  inbox_.push({i, std::nullopt});
}

//===----------------------------------------------------------------------===//
// Schedules
//===----------------------------------------------------------------------===//

std::pair<std::size_t, Message> RecordingCoordinatorChannel::recv() {
  auto r = inner_.recv();
  log_.push_back(r.first);
  return r;
}

ReplayCoordinatorChannel::ReplayCoordinatorChannel(
    CoordinatorChannel &inner, std::vector<std::size_t> order)
    : inner_(inner), order_(std::move(order)), held_(inner.num_workers()) {}

std::pair<std::size_t, Message> ReplayCoordinatorChannel::recv() {
  if (next_ >= order_.size())
    throw TransportError("replay schedule exhausted");
  std::size_t want = order_[next_++];
  if (want >= held_.size())
    throw TransportError("replay schedule names unknown worker " +
                         std::to_string(want));
  while (held_[want].empty()) {
    auto [w, m] = inner_.recv();
    held_[w].push_back(std::move(m));
  }
  Message m = std::move(held_[want].front());
  held_[want].pop_front();
  return {want, std::move(m)};
}

// Text form:
//   coordinator: 0 1 0 2 ...
//   worker 0: 3:17 5:2 ...
std::string Schedule::serialize() const {
  std::ostringstream out;
  out << "coordinator:";
  for (auto w : coordinator)
    out << ' ' << w;
  out << '\n';
  for (std::size_t i = 0; i < workers.size(); ++i) {
    out << "worker " << i << ':';
    for (auto [region, step] : workers[i])
      out << ' ' << region << ':' << step;
    out << '\n';
  }
  return out.str();
}

Schedule Schedule::parse(const std::string &text) {
  Schedule s;
  std::istringstream in(text);
  std::string line;
  bool saw_coord = false;
  auto bad = [](const std::string &why) {
    return std::invalid_argument("malformed schedule: " + why);
  };
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "coordinator:") {
      saw_coord = true;
      std::size_t w;
      while (ls >> w)
        s.coordinator.push_back(w);
      if (!ls.eof())
        throw bad("coordinator entry");
    } else if (head == "worker") {
      std::string idx;
      ls >> idx;
      if (idx.empty() || idx.back() != ':')
        throw bad("worker header");
      std::size_t id = std::stoul(idx.substr(0, idx.size() - 1));
      if (id != s.workers.size())
        throw bad("workers out of order");
      s.workers.emplace_back();
      std::string tok;
      while (ls >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos)
          throw bad("point '" + tok + "'");
        s.workers.back().emplace_back(std::stoull(tok.substr(0, colon)),
                                      std::stoull(tok.substr(colon + 1)));
      }
    } else {
      throw bad("line '" + line + "'");
    }
  }
  if (!saw_coord)
    throw bad("missing coordinator line");
  return s;
}

} // namespace tdp
