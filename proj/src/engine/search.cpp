#include "tdp/engine.hpp"

#include <stdexcept>

namespace tdp {

std::string to_string(SearchStrategy s) {
  switch (s.kind) {
  case SearchKind::Dfs: return "dfs";
  case SearchKind::Bfs: return "bfs";
  case SearchKind::Random: return "rand";
  }
  return "?";
}

SearchStrategy parse_strategy(std::string_view name, std::uint64_t seed) {
  if (name == "dfs")
    return SearchStrategy::dfs();
  if (name == "bfs")
    return SearchStrategy::bfs();
  if (name == "rand" || name == "random")
    return SearchStrategy::random(seed);
  throw std::invalid_argument("unknown search strategy '" + std::string(name) +
                              "'");
}

StateSelector::StateSelector(SearchStrategy strategy)
    : strategy_(strategy), rng_(strategy.seed) {}

std::size_t StateSelector::select(std::span<const ExecState> active) {
  if (active.empty())
    throw std::logic_error("select on an empty state list");
  std::size_t best = 0;
  switch (strategy_.kind) {
  case SearchKind::Dfs:
    for (std::size_t i = 1; i < active.size(); ++i) {
      const auto &s = active[i];
      const auto &b = active[best];
      if (s.depth() > b.depth() || (s.depth() == b.depth() && s.id > b.id))
        best = i;
    }
    return best;
  case SearchKind::Bfs:
    for (std::size_t i = 1; i < active.size(); ++i) {
      const auto &s = active[i];
      const auto &b = active[best];
      if (s.depth() < b.depth() || (s.depth() == b.depth() && s.id < b.id))
        best = i;
    }
    return best;
  case SearchKind::Random:
    return static_cast<std::size_t>(rng_() % active.size());
  }
  return best;
}

std::size_t select_next(SearchStrategy strategy,
                        std::span<const ExecState> active) {
  StateSelector sel(strategy);
  return sel.select(active);
}

} // namespace tdp
