#include "tdp/lang.hpp"

#include <algorithm>

namespace tdp {

std::string_view to_string(BinOp op) {
  switch (op) {
  case BinOp::Add: return "+";
  case BinOp::Sub: return "-";
  case BinOp::Mul: return "*";
  case BinOp::Lt: return "<";
  case BinOp::Le: return "<=";
  case BinOp::Gt: return ">";
  case BinOp::Ge: return ">=";
  case BinOp::Eq: return "==";
  case BinOp::Ne: return "!=";
  case BinOp::And: return "and";
  case BinOp::Or: return "or";
  }
  return "?";
}

bool is_comparison(BinOp op) {
  switch (op) {
  case BinOp::Lt:
  case BinOp::Le:
  case BinOp::Gt:
  case BinOp::Ge:
  case BinOp::Eq:
  case BinOp::Ne:
    return true;
  default:
    return false;
  }
}

ExprRef Expr::constant(std::int64_t value) {
  auto e = std::make_shared<Expr>();
  e->kind_ = ExprKind::Const;
  e->value_ = value;
  return e;
}

ExprRef Expr::var(std::string name, std::uint32_t slot) {
  auto e = std::make_shared<Expr>();
  e->kind_ = ExprKind::Var;
  e->name_ = std::move(name);
  e->slot_ = slot;
  return e;
}

ExprRef Expr::neg(ExprRef operand) {
  auto e = std::make_shared<Expr>();
  e->kind_ = ExprKind::Neg;
  e->lhs_ = std::move(operand);
  return e;
}

ExprRef Expr::logical_not(ExprRef operand) {
  auto e = std::make_shared<Expr>();
  e->kind_ = ExprKind::Not;
  e->lhs_ = std::move(operand);
  return e;
}

ExprRef Expr::binary(BinOp op, ExprRef lhs, ExprRef rhs) {
  auto e = std::make_shared<Expr>();
  e->kind_ = ExprKind::Binary;
  e->op_ = op;
  e->lhs_ = std::move(lhs);
  e->rhs_ = std::move(rhs);
  return e;
}

bool structurally_equal(const Expr &a, const Expr &b) {
  if (&a == &b)
    return true;
  if (a.kind() != b.kind())
    return false;
  switch (a.kind()) {
  case ExprKind::Const:
    return a.value() == b.value();
  case ExprKind::Var:
    return a.slot() == b.slot() && a.name() == b.name();
  case ExprKind::Neg:
  case ExprKind::Not:
    return structurally_equal(*a.operand(), *b.operand());
  case ExprKind::Binary:
    return a.op() == b.op() && structurally_equal(*a.lhs(), *b.lhs()) &&
           structurally_equal(*a.rhs(), *b.rhs());
  }
  return false;
}

bool structurally_equal(const ExprRef &a, const ExprRef &b) {
  if (!a || !b)
    return !a && !b;
  return structurally_equal(*a, *b);
}

namespace {

void print(const Expr &e, std::string &out) {
  switch (e.kind()) {
  case ExprKind::Const:
    out += std::to_string(e.value());
    return;
  case ExprKind::Var:
    out += e.name();
    return;
  case ExprKind::Neg:
    out += '-';
    if (e.operand()->kind() == ExprKind::Binary) {
      print(*e.operand(), out);
    } else {
      out += '(';
      print(*e.operand(), out);
      out += ')';
    }
    return;
  case ExprKind::Not:
    out += '!';
    print(*e.operand(), out);
    return;
  case ExprKind::Binary:
    out += '(';
    print(*e.lhs(), out);
    if (e.op() == BinOp::And || e.op() == BinOp::Or) {
      out += ' ';
      out += to_string(e.op());
      out += ' ';
    } else {
      out += to_string(e.op());
    }
    print(*e.rhs(), out);
    out += ')';
    return;
  }
}

template <typename Lookup>
std::int64_t eval(const Expr &e, const Lookup &lookup) {
  switch (e.kind()) {
  case ExprKind::Const:
    return e.value();
  case ExprKind::Var:
    return lookup(e);
  case ExprKind::Neg:
    return static_cast<std::int64_t>(
        0u - static_cast<std::uint64_t>(eval(*e.operand(), lookup)));
  case ExprKind::Not:
    return eval(*e.operand(), lookup) == 0 ? 1 : 0;
  case ExprKind::Binary:
    return apply(e.op(), eval(*e.lhs(), lookup), eval(*e.rhs(), lookup));
  }
  return 0;
}

} // namespace

std::string to_string(const Expr &e) {
  std::string out;
  print(e, out);
  return out;
}

std::int64_t apply(BinOp op, std::int64_t lhs, std::int64_t rhs) {
  const auto ul = static_cast<std::uint64_t>(lhs);
  const auto ur = static_cast<std::uint64_t>(rhs);
  switch (op) {
  case BinOp::Add: return static_cast<std::int64_t>(ul + ur);
  case BinOp::Sub: return static_cast<std::int64_t>(ul - ur);
  case BinOp::Mul: return static_cast<std::int64_t>(ul * ur);
  case BinOp::Lt: return lhs < rhs;
  case BinOp::Le: return lhs <= rhs;
  case BinOp::Gt: return lhs > rhs;
  case BinOp::Ge: return lhs >= rhs;
  case BinOp::Eq: return lhs == rhs;
  case BinOp::Ne: return lhs != rhs;
  case BinOp::And: return lhs != 0 && rhs != 0;
  case BinOp::Or: return lhs != 0 || rhs != 0;
  }
  return 0;
}

std::int64_t evaluate(const Expr &e,
                      std::span<const std::optional<std::int64_t>> slots) {
  return eval(e, [&](const Expr &v) {
    if (v.slot() >= slots.size() || !slots[v.slot()])
      throw UnboundVariable(v.name());
    return *slots[v.slot()];
  });
}

std::int64_t evaluate(const Expr &e, std::span<const std::int64_t> slots) {
  return eval(e, [&](const Expr &v) {
    if (v.slot() >= slots.size())
      throw UnboundVariable(v.name());
    return slots[v.slot()];
  });
}

void collect_slots(const Expr &e, std::vector<std::uint32_t> &out) {
  std::vector<const Expr *> stack{&e};
  while (!stack.empty()) {
    const Expr *cur = stack.back();
    stack.pop_back();
    switch (cur->kind()) {
    case ExprKind::Const:
      break;
    case ExprKind::Var:
      out.push_back(cur->slot());
      break;
    case ExprKind::Neg:
    case ExprKind::Not:
      stack.push_back(cur->operand().get());
      break;
    case ExprKind::Binary:
      stack.push_back(cur->lhs().get());
      stack.push_back(cur->rhs().get());
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

} // namespace tdp
