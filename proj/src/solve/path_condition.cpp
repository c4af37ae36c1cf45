#include "tdp/solve.hpp"

#include <algorithm>
#include <stdexcept>

namespace tdp {

std::string to_string(const Constraint &c) {
  std::string body = to_string(*c.expr);
  if (c.expr->kind() != ExprKind::Binary)
    body = "(" + body + ")";
  return c.taken ? body : "!" + body;
}

void PathCondition::push(ExprRef expr, bool taken) {
  constraints_.push_back(Constraint{
      std::move(expr), taken, static_cast<std::uint32_t>(size() + 1)});
}

PathCondition PathCondition::extended(ExprRef expr, bool taken) const {
  PathCondition out = *this;
  out.push(std::move(expr), taken);
  return out;
}

PathCondition PathCondition::parent() const {
  PathCondition out = *this;
  if (!out.constraints_.empty())
    out.constraints_.pop_back();
  return out;
}

std::vector<std::uint32_t> PathCondition::mentioned() const {
  std::vector<std::uint32_t> out;
  for (const auto &c : constraints_)
    collect_slots(*c.expr, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool PathCondition::satisfied_by(std::span<const std::int64_t> inputs) const {
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const Constraint &c) { return c.holds(inputs); });
}

std::string PathCondition::to_string() const {
  if (constraints_.empty())
    return "true";
  std::string out = "(";
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    if (i)
      out += " and ";
    out += tdp::to_string(constraints_[i]);
  }
  return out + ")";
}

Test::Test(std::vector<std::string> names, std::vector<std::int64_t> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.size() != values_.size())
    throw std::invalid_argument("test names and values differ in length");
}

Test Test::from_inputs(std::span<const SymDecl> decls,
                       std::span<const std::int64_t> values) {
  std::vector<std::string> names;
  names.reserve(decls.size());
  for (const auto &d : decls)
    names.push_back(d.name);
  return Test(std::move(names),
              std::vector<std::int64_t>(values.begin(), values.end()));
}

std::optional<std::int64_t> Test::get(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name)
      return values_[i];
  return std::nullopt;
}

std::vector<std::int64_t> Test::align(std::span<const SymDecl> decls) const {
  std::vector<std::int64_t> out;
  out.reserve(decls.size());
  for (const auto &d : decls) {
    auto v = get(d.name);
    if (!v)
      throw std::invalid_argument("test has no value for input '" + d.name +
                                  "'");
    if (*v < d.lo || *v > d.hi)
      throw std::invalid_argument("test value for '" + d.name +
                                  "' is outside its domain");
    out.push_back(*v);
  }
  return out;
}

std::string Test::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (i)
      out += ',';
    out += names_[i] + "=" + std::to_string(values_[i]);
  }
  return out + "}";
}

void encode_test(const Test &t, ByteWriter &out) {
  if (t.size() > 0xFFFF)
    throw std::length_error("test has too many inputs to encode");
  out.u16(static_cast<std::uint16_t>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto &name = t.names()[i];
    if (name.size() > 0xFFFF)
      throw std::length_error("input name too long to encode");
    out.u16(static_cast<std::uint16_t>(name.size()));
    out.bytes(name);
    out.i64(t.values()[i]);
  }
}

Test decode_test(ByteReader &in) {
  std::uint16_t count = in.u16();
  std::vector<std::string> names;
  std::vector<std::int64_t> values;
  names.reserve(count);
  values.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    std::uint16_t len = in.u16();
    names.push_back(in.bytes(len));
    values.push_back(in.i64());
  }
  return Test(std::move(names), std::move(values));
}

bool solve_path(std::span<const std::int64_t> test, const Expr &cond) {
  return evaluate(cond, test) != 0;
}

std::int64_t
evaluate_concrete(const Expr &expr, const Test &test,
                  const std::unordered_map<std::string, std::int64_t> &env) {
  switch (expr.kind()) {
  case ExprKind::Const:
    return expr.value();
  case ExprKind::Var: {
    if (auto v = test.get(expr.name()))
      return *v;
    auto it = env.find(expr.name());
    if (it == env.end())
      throw UnboundVariable(expr.name());
    return it->second;
  }
  case ExprKind::Neg:
    return static_cast<std::int64_t>(
        0u - static_cast<std::uint64_t>(
                 evaluate_concrete(*expr.operand(), test, env)));
  case ExprKind::Not:
    return evaluate_concrete(*expr.operand(), test, env) == 0;
  case ExprKind::Binary:
    return apply(expr.op(), evaluate_concrete(*expr.lhs(), test, env),
                 evaluate_concrete(*expr.rhs(), test, env));
  }
  return 0;
}

} // namespace tdp
