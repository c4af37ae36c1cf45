#include "tdp/worker.hpp"

namespace tdp {

std::variant<Offload, NoWork> offload(Exploration &ex, Engine &engine,
                                      std::size_t threshold) {
  if (ex.active().size() <= threshold)
    return NoWork{};
  std::optional<ExecState> s = ex.take_shallowest();
  if (!s)
    return NoWork{};
  return Offload{engine.solver().get_model(s->pc), s->depth()};
}

Worker::Worker(const Program &program, WorkerConfig config)
    : program_(program), config_(config), engine_(program, config.engine) {}

std::optional<Finish> Worker::run_task(const Task &task, const StepHook &hook) {
  last_resumed_.reset();
  ExecState start;
  bool resumed = false;
  if (task.test_depth > 0 && !suspended_.empty()) {
    std::vector<std::int64_t> aligned;
    try {
      aligned = task.test.align(program_.inputs);
    } catch (const std::invalid_argument &e) {
      throw ReplayDivergence(std::string("unusable test: ") + e.what());
    }
    if (auto idx = find_resumable(suspended_, aligned, task.test_depth,
                                  config_.resume_order)) {
      start = std::move(suspended_[*idx]);
      suspended_.erase(suspended_.begin() + static_cast<std::ptrdiff_t>(*idx));
      last_resumed_ = start.id;
      resumed = true;
    }
  }
  if (!resumed)
    start = engine_.initial_state();

  Exploration ex(engine_, std::move(start), task.test, task.test_depth,
                 task.final_depth, task.strategy);
  ++regions_;
  for (std::uint64_t step = 0; !ex.done(); ++step) {
    if (hook && !hook(ex, step))
      return std::nullopt;
    if (ex.done())
      break;
    ex.step();
  }
  RegionResult r = ex.finish();
  for (auto &s : r.suspended)
    suspended_.push_back(std::move(s));

  Finish f;
  f.stats = r.stats;
  f.completed.reserve(r.completed.size());
  for (const auto &c : r.completed)
    f.completed.push_back(c.path);
  f.frontier.reserve(r.frontier.size());
  for (const auto &s : r.frontier)
    f.frontier.push_back(s.path);
  return f;
}

namespace {

const char *name_of(const Message &m) { return to_string(tag_of(m)); }

} // namespace

void run_worker(const Program &program, const WorkerConfig &config,
                WorkerChannel &channel) {
  if (config.offload_threshold == 0)
    throw std::invalid_argument("offload threshold must be positive");
  Worker worker(program, config);
  std::size_t replay_next = 0;

  for (;;) {
    Message m = channel.recv();
    if (std::holds_alternative<Terminate>(m))
      return;
    if (std::holds_alternative<ProvideWork>(m)) {
      channel.send(NoWork{});
      continue;
    }
    const Task *task = std::get_if<Task>(&m);
    if (!task)
      throw ProtocolError(std::string("worker received ") + name_of(m));

    const std::uint64_t region = worker.regions();
    bool terminated = false;

    // Returns false when the coordinator asked us to stop.
    auto handle = [&](Exploration &ex, const Message &msg) {
      if (std::holds_alternative<ProvideWork>(msg)) {
        std::visit([&](auto &&reply) { channel.send(reply); },
                   offload(ex, worker.engine(), config.offload_threshold));
        return true;
      }
      if (std::holds_alternative<Terminate>(msg)) {
        terminated = true;
        return false;
      }
      throw ProtocolError(std::string("worker received ") + name_of(msg) +
                          " while busy");
    };

    auto hook = [&](Exploration &ex, std::uint64_t step) {
      if (config.replay) {
        const auto &pts = *config.replay;
        while (replay_next < pts.size() &&
               pts[replay_next] == PollPoint{region, step}) {
          ++replay_next;
          if (!handle(ex, channel.recv()))
            return false;
        }
        return true;
      }
      while (auto msg = channel.try_recv()) {
        if (config.record)
          config.record->emplace_back(region, step);
        if (!handle(ex, *msg))
          return false;
      }
      return true;
    };

    std::optional<Finish> fin = worker.run_task(*task, hook);
    if (terminated || !fin)
      return;
    channel.send(std::move(*fin));
  }
}

} // namespace tdp
