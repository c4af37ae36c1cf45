#pragma once

#include "tdp/lang.hpp"
#include "tdp/solve.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdp {

/// Branch decisions along a path; element i is the decision at symbolic
/// depth i+1 (true = true branch).
using PathVector = std::vector<bool>;

/// "011" style rendering.
std::string to_string(const PathVector &path);
PathVector parse_path(std::string_view bits);
/// True iff `prefix` is a prefix of `path`.
bool extends(const PathVector &path, const PathVector &prefix);

enum class StateStatus : std::uint8_t { Active, Suspended, Terminated, Frontier };

struct Termination {
  RunOutcome kind = RunOutcome::Exit;
  std::int64_t exit_code = 0;
  std::string error_label;
};

/// One node of the execution tree.
struct ExecState {
  std::uint64_t id = 0; // creation ordinal within one engine
  BlockId block = 0;
  std::size_t instr = 0;
  /// Symbolic store indexed by variable slot; null means unassigned.
  std::vector<ExprRef> env;
  PathCondition pc;
  PathVector path;
  StateStatus status = StateStatus::Active;
  Termination termination;

  std::uint32_t depth() const { return static_cast<std::uint32_t>(path.size()); }
};

inline const PathVector &path_of(const ExecState &s) { return s.path; }

//===----------------------------------------------------------------------===//
// Search strategies
//===----------------------------------------------------------------------===//

enum class SearchKind : std::uint8_t { Dfs = 0, Bfs = 1, Random = 2 };

struct SearchStrategy {
  SearchKind kind = SearchKind::Dfs;
  std::uint64_t seed = 0; // Random only

  static SearchStrategy dfs() { return {SearchKind::Dfs, 0}; }
  static SearchStrategy bfs() { return {SearchKind::Bfs, 0}; }
  static SearchStrategy random(std::uint64_t seed) {
    return {SearchKind::Random, seed};
  }
  bool operator==(const SearchStrategy &) const = default;
};

std::string to_string(SearchStrategy s);
/// Accepts dfs, bfs, rand / random. Throws std::invalid_argument.
SearchStrategy parse_strategy(std::string_view name, std::uint64_t seed = 0);

/// Picks the next active state to run.
///   dfs: deepest, ties to the most recently created
///   bfs: shallowest, ties to the earliest created
///   random: uniform, from a generator seeded once per selector
class StateSelector {
public:
  explicit StateSelector(SearchStrategy strategy);
  std::size_t select(std::span<const ExecState> active);

private:
  SearchStrategy strategy_;
  std::mt19937_64 rng_;
};

/// Single selection from a fresh selector.
std::size_t select_next(SearchStrategy strategy,
                        std::span<const ExecState> active);

//===----------------------------------------------------------------------===//
// Engine
//===----------------------------------------------------------------------===//

class ReplayDivergence : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultMaxSteps = 10'000'000;

struct EngineOptions {
  /// Instruction budget per region.
  std::uint64_t max_steps = kDefaultMaxSteps;
  SolverOptions solver;
};

/// Restriction applied while exploring a region: decisions above `depth`
/// follow `test`; nothing forks past `final_depth`.
struct Guide {
  std::span<const std::int64_t> test; // aligned to program inputs
  std::uint32_t depth = 0;
  std::uint32_t final_depth = 0;
};

struct BranchOutcome {
  std::vector<ExecState> successors;
  std::optional<ExecState> suspended;
};

struct CompletedPath {
  PathVector path;
  PathCondition pc;
  Termination how;
};

struct RegionStats {
  std::uint64_t states_created = 0;
  std::uint64_t suspended = 0;
  std::uint64_t solver_queries = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t instructions = 0;
  std::uint64_t completed_paths = 0;
  std::uint64_t frontier_states = 0;
  bool partial = false;

  RegionStats &operator+=(const RegionStats &o);
  bool operator==(const RegionStats &) const = default;
};

struct RegionResult {
  std::vector<CompletedPath> completed;
  std::vector<ExecState> frontier;
  /// Suspended siblings created while replaying the guide.
  std::vector<ExecState> suspended;
  RegionStats stats;
};

class Exploration;

/// Symbolic interpreter for one program. Owns a private solver (and its
/// query cache); not thread-safe, one instance per worker.
class Engine {
public:
  Engine(const Program &program, EngineOptions opts = {});

  const Program &program() const { return program_; }
  Solver &solver() { return solver_; }
  const EngineOptions &options() const { return opts_; }

  ExecState initial_state();

  enum class Stop { Branch, Terminated, OutOfBudget };
  struct Advance {
    Stop stop = Stop::Terminated;
    ExprRef cond; // substituted branch condition when stop == Branch
  };

  /// Runs assignments and input-independent branches until the state
  /// reaches a symbolic branch or terminates. `budget` is decremented per
  /// instruction.
  Advance advance(ExecState &state, std::uint64_t &budget);

  /// Resolves the branch the state is parked on. Constant conditions pass
  /// through without consuming depth. Above the guide depth the test picks
  /// the side and the other child is returned suspended. Below it, every
  /// feasible side becomes a successor, except that a state already at
  /// final_depth is returned as frontier.
  BranchOutcome step_branch(ExecState state, const ExprRef &cond,
                            const Guide &guide);

  /// Explores the region of (test, test_depth) below `start` to completion.
  RegionResult start_execution(ExecState start, const Test &test,
                               std::uint32_t test_depth,
                               std::uint32_t final_depth,
                               SearchStrategy strategy);

  std::uint64_t next_id() { return next_id_++; }

private:
  ExecState child_of(const ExecState &parent, const ExprRef &cond, bool taken);

  const Program &program_;
  EngineOptions opts_;
  Solver solver_;
  std::uint64_t next_id_ = 0;
};

/// Substitutes the symbolic store into `e` and folds constant subtrees.
ExprRef substitute(const ExprRef &e, const std::vector<ExprRef> &env);

/// Incremental region exploration. Callers may interleave step() with
/// inspection of, or removal from, the active list.
class Exploration {
public:
  /// Throws ReplayDivergence when test_depth > 0 and the test does not
  /// satisfy the start state's path condition.
  Exploration(Engine &engine, ExecState start, const Test &test,
              std::uint32_t test_depth, std::uint32_t final_depth,
              SearchStrategy strategy);

  bool done() const { return active_.empty() || out_of_budget_; }
  /// Selects one active state and runs it to its next symbolic branch or
  /// termination.
  void step();
  void run_to_completion();

  const std::vector<ExecState> &active() const { return active_; }
  std::uint32_t test_depth() const { return test_depth_; }

  /// Removes and returns the shallowest active state (earliest created on
  /// ties) that lies at or below the guided prefix.
  std::optional<ExecState> take_shallowest();

  RegionResult finish();

private:
  Engine &engine_;
  std::vector<std::int64_t> test_;
  std::uint32_t test_depth_;
  std::uint32_t final_depth_;
  StateSelector selector_;
  std::vector<ExecState> active_;
  RegionResult result_;
  std::uint64_t budget_;
  std::uint64_t queries_at_start_;
  std::uint64_t hits_at_start_;
  bool out_of_budget_ = false;
};

/// Index of the shallowest state (earliest created on ties) whose depth is
/// at least `min_depth`.
std::optional<std::size_t> shallowest_index(std::span<const ExecState> states,
                                            std::uint32_t min_depth);

/// Unit of work transfer: replay `test` for `depth` symbolic branches, then
/// explore symbolically.
struct TestDepthPair {
  Test test;
  std::uint32_t depth = 0;
  bool operator==(const TestDepthPair &) const = default;
};

enum class ResumeOrder : std::uint8_t { Deepest, List };

/// Index of the suspended state to resume for (test, test_depth): states
/// deeper than test_depth are skipped; among those whose path condition
/// the test satisfies, Deepest prefers the deepest (then earliest created)
/// and List takes the first in list order.
std::optional<std::size_t>
find_resumable(std::span<const ExecState> suspended,
               std::span<const std::int64_t> test, std::uint32_t test_depth,
               ResumeOrder order = ResumeOrder::Deepest);

} // namespace tdp
