#include "tdp/coord.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace tdp {

namespace {

using Clock = std::chrono::steady_clock;

class Coordinator {
public:
  Coordinator(const CoordinatorConfig &config, std::vector<TestDepthPair> pool,
              CoordinatorChannel &channel)
      : config_(config), channel_(channel), n_(channel.num_workers()),
        busy_(n_, false), done_(n_, false),
        started_(n_) {
    result_.workers.resize(n_);
    for (auto &p : pool)
      pool_.push_back({std::move(p), false});
  }

  CoordinatorResult run() {
    if (n_ == 0)
      throw std::invalid_argument("coordinator needs at least one worker");
    try {
      for (std::size_t w = 0; w < n_ && !pool_.empty(); ++w)
        dispatch_from_pool(w);
      try_steal();
      while (!finished()) {
        std::optional<std::pair<std::size_t, Message>> in;
        try {
          in = channel_.recv();
        } catch (const WorkerDisconnected &e) {
          // A terminated worker closing its link is expected.
          if (e.worker() < n_ && done_[e.worker()])
            continue;
          throw;
        }
        handle(in->first, in->second);
        try_steal();
      }
      for (std::size_t w = 0; w < n_; ++w)
        if (!done_[w])
          terminate(w);
    } catch (const std::exception &e) {
      abort(e.what());
    }
    for (auto &e : pool_)
      result_.abandoned.push_back(std::move(e.pair));
    if (!result_.abandoned.empty())
      result_.partial = true;
    return std::move(result_);
  }

private:
  bool past_deadline() const {
    return config_.deadline && Clock::now() >= *config_.deadline;
  }

  bool finished() const {
    if (steal_victim_)
      return false;
    for (std::size_t w = 0; w < n_; ++w)
      if (busy_[w])
        return false;
    return pool_.empty() || past_deadline();
  }

  void dispatch(std::size_t w, TestDepthPair pair) {
    Task t{config_.strategy, pair.test, pair.depth, config_.final_depth};
    channel_.send(w, t);
    busy_[w] = true;
    started_[w] = Clock::now();
    result_.dispatched.push_back(std::move(pair));
  }

  void dispatch_from_pool(std::size_t w) {
    PoolEntry e = std::move(pool_.front());
    pool_.pop_front();
    if (e.offloaded)
      ++result_.workers[w].transfers_in;
    dispatch(w, std::move(e.pair));
  }

  std::optional<std::size_t> idle_worker() const {
    for (std::size_t w = 0; w < n_; ++w)
      if (!busy_[w] && !done_[w])
        return w;
    return std::nullopt;
  }

  void terminate(std::size_t w) {
    channel_.send(w, Terminate{});
    done_[w] = true;
  }

  void handle(std::size_t w, const Message &msg) {
    if (const auto *f = std::get_if<Finish>(&msg)) {
      if (!busy_[w])
        throw ProtocolViolation("Finish from idle worker " + std::to_string(w));
      busy_[w] = false;
      WorkerTally &t = result_.workers[w];
      ++t.regions;
      t.stats += f->stats;
      t.busy_ms += std::chrono::duration<double, std::milli>(Clock::now() -
                                                             started_[w])
                       .count();
      result_.completed.insert(result_.completed.end(), f->completed.begin(),
                               f->completed.end());
      result_.frontier.insert(result_.frontier.end(), f->frontier.begin(),
                              f->frontier.end());
      result_.partial = result_.partial || f->stats.partial;
      retries_ = 0;
      if (past_deadline())
        terminate(w);
      else if (!pool_.empty())
        dispatch_from_pool(w);
      return;
    }
    if (const auto *o = std::get_if<Offload>(&msg)) {
      if (steal_victim_ != w)
        throw ProtocolViolation("unsolicited Offload from worker " +
                                std::to_string(w));
      steal_victim_.reset();
      retries_ = 0;
      ++result_.transfers;
      ++result_.workers[w].transfers_out;
      TestDepthPair pair{o->test, o->test_depth};
      if (auto idle = idle_worker(); idle && !past_deadline()) {
        ++result_.workers[*idle].transfers_in;
        dispatch(*idle, std::move(pair));
      } else {
        pool_.push_back({std::move(pair), true});
      }
      return;
    }
    if (std::holds_alternative<NoWork>(msg)) {
      if (steal_victim_ != w)
        throw ProtocolViolation("unsolicited NoWork from worker " +
                                std::to_string(w));
      steal_victim_.reset();
      ++result_.no_work_received;
      return;
    }
    throw ProtocolViolation(std::string("coordinator received ") +
                            to_string(tag_of(msg)));
  }

  // One steal request in flight at a time; victims rotate over busy
  // workers.
  void try_steal() {
    if (steal_victim_ || past_deadline() || retries_ >= config_.steal_retry_cap)
      return;
    if (!idle_worker() || !pool_.empty())
      return;
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t w = (cursor_ + k) % n_;
      if (!busy_[w])
        continue;
      cursor_ = w + 1;
      channel_.send(w, ProvideWork{});
      steal_victim_ = w;
      ++retries_;
      ++result_.provide_work_sent;
      return;
    }
  }

  void abort(const std::string &why) {
    result_.error = why;
    result_.partial = true;
    for (std::size_t w = 0; w < n_; ++w) {
      if (done_[w])
        continue;
      try {
        terminate(w);
      } catch (const std::exception &) {
      }
    }
  }

  struct ProtocolViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  const CoordinatorConfig &config_;
  CoordinatorChannel &channel_;
  std::size_t n_;
  struct PoolEntry {
    TestDepthPair pair;
    bool offloaded;
  };

  std::deque<PoolEntry> pool_;
  std::vector<bool> busy_;
  std::vector<bool> done_;
  std::vector<Clock::time_point> started_;
  std::optional<std::size_t> steal_victim_;
  std::size_t cursor_ = 0;
  std::size_t retries_ = 0;
  CoordinatorResult result_;
};

} // namespace

CoordinatorResult run_coordinator(const CoordinatorConfig &config,
                                  std::vector<TestDepthPair> pool,
                                  CoordinatorChannel &channel) {
  return Coordinator(config, std::move(pool), channel).run();
}

std::vector<TestDepthPair> duplicate_dispatches(const CoordinatorResult &r) {
  std::map<std::pair<std::string, std::uint32_t>, std::size_t> seen;
  std::vector<TestDepthPair> dups;
  for (const auto &p : r.dispatched)
    if (++seen[{p.test.to_string(), p.depth}] == 2)
      dups.push_back(p);
  return dups;
}

} // namespace tdp
