#include "tdp/coord.hpp"

#include <algorithm>

namespace tdp {

std::vector<TestDepthPair> seed_pool(const Program &program,
                                     std::size_t workers,
                                     std::uint32_t final_depth,
                                     EngineOptions opts) {
  if (workers == 0)
    throw std::invalid_argument("seed_pool needs at least one worker");
  Engine engine(program, opts);

  struct Leaf {
    ExecState state;
    bool open; // may still fork
  };
  std::vector<Leaf> leaves;
  leaves.push_back({engine.initial_state(), true});

  while (leaves.size() < workers) {
    std::vector<Leaf> next;
    bool expanded = false;
    for (auto &leaf : leaves) {
      if (!leaf.open) {
        next.push_back(std::move(leaf));
        continue;
      }
      ExecState s = leaf.state;
      std::uint64_t budget = opts.max_steps;
      Engine::Advance adv = engine.advance(s, budget);
      if (adv.stop == Engine::Stop::Terminated) {
        next.push_back({std::move(s), false});
        continue;
      }
      if (adv.stop == Engine::Stop::OutOfBudget ||
          s.depth() >= final_depth) {
        next.push_back({std::move(leaf.state), false});
        continue;
      }
      expanded = true;
      BranchOutcome out =
          engine.step_branch(std::move(s), adv.cond, Guide{{}, 0, final_depth});
      for (auto &c : out.successors)
        next.push_back({std::move(c), true});
    }
    leaves = std::move(next);
    if (!expanded)
      break;
  }

  std::sort(leaves.begin(), leaves.end(), [](const Leaf &a, const Leaf &b) {
    return a.state.path < b.state.path;
  });
  std::vector<TestDepthPair> pool;
  pool.reserve(leaves.size());
  for (const auto &leaf : leaves)
    pool.push_back(
        {engine.solver().get_model(leaf.state.pc), leaf.state.depth()});
  return pool;
}

} // namespace tdp
