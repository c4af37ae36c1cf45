#include "tdp/harness.hpp"

#include <algorithm>
#include <limits>

namespace tdp {

std::uint32_t calibrate_depth(const Program &program, CalibrateLimit limit,
                              EngineOptions opts) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  Engine engine(program, opts);
  Exploration ex(engine, engine.initial_state(), Test{}, 0,
                 std::numeric_limits<std::uint32_t>::max(),
                 SearchStrategy::bfs());
  std::uint64_t steps = 0;
  while (!ex.done()) {
    if (limit.steps && steps >= *limit.steps)
      break;
    if (limit.time && Clock::now() - t0 >= *limit.time)
      break;
    ex.step();
    ++steps;
  }
  if (!ex.active().empty()) {
    std::uint32_t shallowest = std::numeric_limits<std::uint32_t>::max();
    for (const auto &s : ex.active())
      shallowest = std::min(shallowest, s.depth());
    return shallowest;
  }
  RegionResult r = ex.finish();
  std::uint32_t deepest = 0;
  for (const auto &c : r.completed)
    deepest = std::max(deepest, static_cast<std::uint32_t>(c.path.size()));
  return deepest;
}

} // namespace tdp
