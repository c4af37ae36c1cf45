#include "tdp/engine.hpp"

#include <algorithm>

namespace tdp {

std::string to_string(const PathVector &path) {
  std::string out;
  out.reserve(path.size());
  for (bool b : path)
    out += b ? '1' : '0';
  return out;
}

PathVector parse_path(std::string_view bits) {
  PathVector out;
  out.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("path vector must be a 0/1 string");
    out.push_back(c == '1');
  }
  return out;
}

bool extends(const PathVector &path, const PathVector &prefix) {
  return prefix.size() <= path.size() &&
         std::equal(prefix.begin(), prefix.end(), path.begin());
}

RegionStats &RegionStats::operator+=(const RegionStats &o) {
  states_created += o.states_created;
  suspended += o.suspended;
  solver_queries += o.solver_queries;
  cache_hits += o.cache_hits;
  instructions += o.instructions;
  completed_paths += o.completed_paths;
  frontier_states += o.frontier_states;
  partial = partial || o.partial;
  return *this;
}

ExprRef substitute(const ExprRef &e, const std::vector<ExprRef> &env) {
  switch (e->kind()) {
  case ExprKind::Const:
    return e;
  case ExprKind::Var: {
    if (e->slot() >= env.size() || !env[e->slot()])
      throw UnboundVariable(e->name());
    return env[e->slot()];
  }
  case ExprKind::Neg: {
    auto a = substitute(e->operand(), env);
    if (a->is_constant())
      return Expr::constant(static_cast<std::int64_t>(
          0u - static_cast<std::uint64_t>(a->value())));
    return a == e->operand() ? e : Expr::neg(std::move(a));
  }
  case ExprKind::Not: {
    auto a = substitute(e->operand(), env);
    if (a->is_constant())
      return Expr::constant(a->value() == 0 ? 1 : 0);
    return a == e->operand() ? e : Expr::logical_not(std::move(a));
  }
  case ExprKind::Binary: {
    auto l = substitute(e->lhs(), env);
    auto r = substitute(e->rhs(), env);
    if (l->is_constant() && r->is_constant())
      return Expr::constant(apply(e->op(), l->value(), r->value()));
    if (l == e->lhs() && r == e->rhs())
      return e;
    return Expr::binary(e->op(), std::move(l), std::move(r));
  }
  }
  return e;
}

Engine::Engine(const Program &program, EngineOptions opts)
    : program_(program), opts_(opts), solver_(program.inputs, opts.solver) {}

ExecState Engine::initial_state() {
  ExecState s;
  s.id = next_id();
  s.block = program_.entry;
  s.env.resize(program_.slots.size());
  for (std::uint32_t i = 0; i < program_.num_inputs(); ++i)
    s.env[i] = Expr::var(program_.inputs[i].name, i);
  return s;
}

Engine::Advance Engine::advance(ExecState &state, std::uint64_t &budget) {
  for (;;) {
    const BasicBlock &bb = program_.blocks[state.block];
    while (state.instr < bb.instrs.size()) {
      if (budget == 0)
        return {Stop::OutOfBudget, nullptr};
      --budget;
      const Assign &a = bb.instrs[state.instr];
      state.env[a.slot] = substitute(a.value, state.env);
      ++state.instr;
    }
    if (budget == 0)
      return {Stop::OutOfBudget, nullptr};
    --budget;
    const Terminator &t = bb.term;
    switch (t.kind) {
    case TermKind::Branch: {
      auto cond = substitute(t.branch.cond, state.env);
      if (!cond->is_constant())
        return {Stop::Branch, std::move(cond)};
      state.block = cond->value() != 0 ? t.branch.if_true : t.branch.if_false;
      state.instr = 0;
      break;
    }
    case TermKind::Jump:
      state.block = t.jump.target;
      state.instr = 0;
      break;
    case TermKind::Exit:
      state.status = StateStatus::Terminated;
      state.termination = {RunOutcome::Exit, t.exit.code, {}};
      return {Stop::Terminated, nullptr};
    case TermKind::Error:
    case TermKind::None:
      state.status = StateStatus::Terminated;
      state.termination = {RunOutcome::Error, 0, t.error.label};
      return {Stop::Terminated, nullptr};
    }
  }
}

ExecState Engine::child_of(const ExecState &parent, const ExprRef &cond,
                           bool taken) {
  const Branch &br = program_.blocks[parent.block].term.branch;
  ExecState child = parent;
  child.id = next_id();
  child.block = taken ? br.if_true : br.if_false;
  child.instr = 0;
  child.pc.push(cond, taken);
  child.path.push_back(taken);
  child.status = StateStatus::Active;
  return child;
}

BranchOutcome Engine::step_branch(ExecState state, const ExprRef &cond,
                                  const Guide &guide) {
  BranchOutcome out;
  const Branch &br = program_.blocks[state.block].term.branch;

  if (cond->is_constant()) {
    state.block = cond->value() != 0 ? br.if_true : br.if_false;
    state.instr = 0;
    out.successors.push_back(std::move(state));
    return out;
  }

  if (state.depth() < guide.depth) {
    // Guided replay: the test decides; the sibling is parked.
    bool taken = solve_path(guide.test, *cond);
    ExecState kept = child_of(state, cond, taken);
    ExecState parked = child_of(state, cond, !taken);
    parked.status = StateStatus::Suspended;
    out.successors.push_back(std::move(kept));
    out.suspended = std::move(parked);
    return out;
  }

  if (state.depth() >= guide.final_depth) {
    state.status = StateStatus::Frontier;
    out.successors.push_back(std::move(state));
    return out;
  }

  // Active states always carry a satisfiable condition, so at least one
  // side is feasible and the false side needs no query when the true side
  // is not.
  PathCondition with_true = state.pc.extended(cond, true);
  bool true_sat = solver_.check_sat(with_true) == Verdict::Sat;
  bool false_sat =
      !true_sat ||
      solver_.check_sat(state.pc.extended(cond, false)) == Verdict::Sat;
  if (true_sat)
    out.successors.push_back(child_of(state, cond, true));
  if (false_sat)
    out.successors.push_back(child_of(state, cond, false));
  return out;
}

RegionResult Engine::start_execution(ExecState start, const Test &test,
                                     std::uint32_t test_depth,
                                     std::uint32_t final_depth,
                                     SearchStrategy strategy) {
  Exploration ex(*this, std::move(start), test, test_depth, final_depth,
                 strategy);
  ex.run_to_completion();
  return ex.finish();
}

Exploration::Exploration(Engine &engine, ExecState start, const Test &test,
                         std::uint32_t test_depth, std::uint32_t final_depth,
                         SearchStrategy strategy)
    : engine_(engine), test_depth_(test_depth), final_depth_(final_depth),
      selector_(strategy), budget_(engine.options().max_steps),
      queries_at_start_(engine.solver().queries()),
      hits_at_start_(engine.solver().cache_hits()) {
  if (test_depth_ > final_depth_)
    throw std::invalid_argument("test depth exceeds final depth");
  if (test_depth_ > 0) {
    try {
      test_ = test.align(engine.program().inputs);
    } catch (const std::invalid_argument &e) {
      throw ReplayDivergence(std::string("unusable test: ") + e.what());
    }
    for (const auto &c : start.pc.constraints())
      if (c.depth <= test_depth_ && !c.holds(test_))
        throw ReplayDivergence("test " + test.to_string() +
                               " does not follow prefix " +
                               to_string(start.path));
  }
  start.status = StateStatus::Active;
  active_.push_back(std::move(start));
}

void Exploration::step() {
  if (done())
    return;
  std::size_t idx = selector_.select(active_);
  ExecState state = std::move(active_[idx]);
  active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(idx));

  std::uint64_t before = budget_;
  Engine::Advance adv = engine_.advance(state, budget_);
  result_.stats.instructions += before - budget_;

  switch (adv.stop) {
  case Engine::Stop::OutOfBudget:
    out_of_budget_ = true;
    result_.stats.partial = true;
    active_.push_back(std::move(state));
    return;
  case Engine::Stop::Terminated:
    result_.completed.push_back({state.path, state.pc, state.termination});
    return;
  case Engine::Stop::Branch:
    break;
  }

  Guide guide{test_, test_depth_, final_depth_};
  BranchOutcome out = engine_.step_branch(std::move(state), adv.cond, guide);
  if (out.suspended) {
    ++result_.stats.states_created;
    ++result_.stats.suspended;
    result_.suspended.push_back(std::move(*out.suspended));
  }
  for (auto &s : out.successors) {
    if (s.status == StateStatus::Frontier) {
      result_.frontier.push_back(std::move(s));
      continue;
    }
    ++result_.stats.states_created;
    active_.push_back(std::move(s));
  }
}

void Exploration::run_to_completion() {
  while (!done())
    step();
}

std::optional<std::size_t> shallowest_index(std::span<const ExecState> states,
                                            std::uint32_t min_depth) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto &s = states[i];
    if (s.depth() < min_depth)
      continue;
    if (!best || s.depth() < states[*best].depth() ||
        (s.depth() == states[*best].depth() && s.id < states[*best].id))
      best = i;
  }
  return best;
}

std::optional<ExecState> Exploration::take_shallowest() {
  auto best = shallowest_index(active_, test_depth_);
  if (!best)
    return std::nullopt;
  ExecState s = std::move(active_[*best]);
  active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(*best));
  return s;
}

RegionResult Exploration::finish() {
  result_.stats.completed_paths = result_.completed.size();
  result_.stats.frontier_states = result_.frontier.size();
  result_.stats.solver_queries =
      engine_.solver().queries() - queries_at_start_;
  result_.stats.cache_hits = engine_.solver().cache_hits() - hits_at_start_;
  return std::move(result_);
}

std::optional<std::size_t>
find_resumable(std::span<const ExecState> suspended,
               std::span<const std::int64_t> test, std::uint32_t test_depth,
               ResumeOrder order) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < suspended.size(); ++i) {
    const ExecState &s = suspended[i];
    if (s.depth() > test_depth || !s.pc.satisfied_by(test))
      continue;
    if (order == ResumeOrder::List)
      return i;
    const ExecState *b = best ? &suspended[*best] : nullptr;
    if (!b || s.depth() > b->depth() ||
        (s.depth() == b->depth() && s.id < b->id))
      best = i;
  }
  return best;
}

} // namespace tdp
