#pragma once

#include "tdp/engine.hpp"
#include "tdp/proto.hpp"
#include "tdp/transport.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tdp {

/// Initial work pool: BFS layers are expanded from the root until at least
/// `workers` states exist (active or terminated) or nothing is left to
/// expand. Each becomes (model of its path condition, its depth). With one
/// worker the pool is the whole tree at depth 0.
std::vector<TestDepthPair> seed_pool(const Program &program,
                                     std::size_t workers,
                                     std::uint32_t final_depth,
                                     EngineOptions opts = {});

inline constexpr std::size_t kDefaultStealRetryCap = 64;

struct CoordinatorConfig {
  SearchStrategy strategy;
  std::uint32_t final_depth = 0;
  /// ProvideWork attempts per idle episode; the count resets on Finish.
  std::size_t steal_retry_cap = kDefaultStealRetryCap;
  /// Soft deadline: no new steals after it, and each worker is told to
  /// terminate at its next Finish.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct WorkerTally {
  std::uint64_t regions = 0;
  RegionStats stats;
  std::uint64_t transfers_in = 0;  // tasks that came from another's Offload
  std::uint64_t transfers_out = 0; // Offloads this worker produced
  double busy_ms = 0;
};

struct CoordinatorResult {
  std::vector<WorkerTally> workers;
  std::vector<PathVector> completed;
  std::vector<PathVector> frontier;
  /// Every pair sent in a Task, in dispatch order.
  std::vector<TestDepthPair> dispatched;
  /// Pairs never dispatched (deadline or abort).
  std::vector<TestDepthPair> abandoned;
  std::uint64_t transfers = 0;
  std::uint64_t provide_work_sent = 0;
  std::uint64_t no_work_received = 0;
  bool partial = false;
  std::string error; // set when the run was aborted
};

/// Coordinator control loop: dispatch the pool, rebalance by stealing from
/// busy workers for idle ones, and broadcast Terminate once every worker
/// is idle with nothing left to hand out.
CoordinatorResult run_coordinator(const CoordinatorConfig &config,
                                  std::vector<TestDepthPair> pool,
                                  CoordinatorChannel &channel);

/// Pairs dispatched more than once.
std::vector<TestDepthPair> duplicate_dispatches(const CoordinatorResult &r);

} // namespace tdp
