#include "tdp/lang.hpp"

namespace tdp {

namespace {

bool tainted(const Expr &e, const std::vector<bool> &taint) {
  switch (e.kind()) {
  case ExprKind::Const:
    return false;
  case ExprKind::Var:
    return taint[e.slot()];
  case ExprKind::Neg:
  case ExprKind::Not:
    return tainted(*e.operand(), taint);
  case ExprKind::Binary:
    return tainted(*e.lhs(), taint) || tainted(*e.rhs(), taint);
  }
  return false;
}

} // namespace

ConcreteRun interpret(const Program &program,
                      std::span<const std::int64_t> inputs,
                      std::uint64_t max_steps) {
  const std::size_t n = program.slots.size();
  std::vector<std::optional<std::int64_t>> values(n);
  std::vector<bool> taint(n, false);
  for (std::size_t i = 0; i < program.num_inputs(); ++i) {
    values[i] = inputs[i];
    taint[i] = true;
  }

  ConcreteRun run;
  BlockId block = program.entry;
  for (;;) {
    const BasicBlock &bb = program.blocks[block];
    for (const auto &a : bb.instrs) {
      if (run.steps++ >= max_steps) {
        run.outcome = RunOutcome::StepLimit;
        return run;
      }
      values[a.slot] = evaluate(*a.value, values);
      taint[a.slot] = tainted(*a.value, taint);
    }
    if (run.steps++ >= max_steps) {
      run.outcome = RunOutcome::StepLimit;
      return run;
    }
    const Terminator &t = bb.term;
    switch (t.kind) {
    case TermKind::Branch: {
      bool taken = evaluate(*t.branch.cond, values) != 0;
      if (tainted(*t.branch.cond, taint))
        run.decisions.push_back(taken);
      block = taken ? t.branch.if_true : t.branch.if_false;
      break;
    }
    case TermKind::Jump:
      block = t.jump.target;
      break;
    case TermKind::Exit:
      run.outcome = RunOutcome::Exit;
      run.exit_code = t.exit.code;
      return run;
    case TermKind::Error:
      run.outcome = RunOutcome::Error;
      run.error_label = t.error.label;
      return run;
    case TermKind::None:
      run.outcome = RunOutcome::Error;
      run.error_label = "missing terminator";
      return run;
    }
  }
}

} // namespace tdp
