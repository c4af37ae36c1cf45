#pragma once

#include "tdp/engine.hpp"
#include "tdp/proto.hpp"
#include "tdp/transport.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace tdp {

inline constexpr std::size_t kDefaultOffloadThreshold = 4;

/// (region index, step index) at which a message was taken mid-region.
using PollPoint = std::pair<std::uint64_t, std::uint64_t>;

struct WorkerConfig {
  EngineOptions engine;
  std::size_t offload_threshold = kDefaultOffloadThreshold;
  ResumeOrder resume_order = ResumeOrder::Deepest;
  /// When set, every mid-region message pickup is appended here.
  std::vector<PollPoint> *record = nullptr;
  /// When set, the worker checks for mid-region messages only at these
  /// points, and blocks for one there.
  const std::vector<PollPoint> *replay = nullptr;
};

/// Offload for a steal request: the shallowest active state at or below
/// the guided prefix, if more than `threshold` states are active. The
/// state leaves the exploration before this returns.
std::variant<Offload, NoWork> offload(Exploration &ex, Engine &engine,
                                      std::size_t threshold);

/// A worker's long-lived state: one engine (and solver cache) plus the
/// suspended states gathered across tasks.
class Worker {
public:
  Worker(const Program &program, WorkerConfig config = {});

  /// Called between steps of a region with the step index; may steal from
  /// the exploration. Returning false aborts the region.
  using StepHook = std::function<bool(Exploration &, std::uint64_t step)>;

  /// Explores the region of `task`. Resumes a matching suspended state,
  /// or replays from the initial state when none matches. Returns nullopt
  /// if the hook aborted the region.
  std::optional<Finish> run_task(const Task &task, const StepHook &hook = {});

  Engine &engine() { return engine_; }
  const std::vector<ExecState> &suspended() const { return suspended_; }
  /// Id of the suspended state the last task resumed, if any.
  std::optional<std::uint64_t> last_resumed() const { return last_resumed_; }
  std::uint64_t regions() const { return regions_; }
  const WorkerConfig &config() const { return config_; }

private:
  const Program &program_;
  WorkerConfig config_;
  Engine engine_;
  std::vector<ExecState> suspended_;
  std::optional<std::uint64_t> last_resumed_;
  std::uint64_t regions_ = 0;
};

class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Serves tasks from the coordinator until Terminate.
void run_worker(const Program &program, const WorkerConfig &config,
                WorkerChannel &channel);

} // namespace tdp
