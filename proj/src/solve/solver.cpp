#include "tdp/solve.hpp"

#include <algorithm>
#include <limits>
#include <thread>

namespace tdp {

namespace {

using i128 = __int128;

constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

struct Interval {
  std::int64_t lo = kMin;
  std::int64_t hi = kMax;

  bool empty() const { return lo > hi; }
  bool contains(std::int64_t v) const { return lo <= v && v <= hi; }
  bool singleton() const { return lo == hi; }
  bool is(std::int64_t v) const { return lo == v && hi == v; }
  /// Known nonzero / known zero, for truth tests.
  bool truthy() const { return !contains(0) && !empty(); }
  bool falsy() const { return is(0); }
};

constexpr Interval kTop{};
constexpr Interval kBool{0, 1};

Interval meet(Interval a, Interval b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

/// Interval from 128-bit bounds, or nullopt when it does not fit in int64.
std::optional<Interval> fit(i128 lo, i128 hi) {
  if (lo < kMin || hi > kMax)
    return std::nullopt;
  return Interval{static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)};
}

Interval clamp(i128 lo, i128 hi) {
  return {static_cast<std::int64_t>(std::max<i128>(lo, kMin)),
          static_cast<std::int64_t>(std::min<i128>(hi, kMax))};
}

BinOp negate_comparison(BinOp op) {
  switch (op) {
  case BinOp::Lt: return BinOp::Ge;
  case BinOp::Le: return BinOp::Gt;
  case BinOp::Gt: return BinOp::Le;
  case BinOp::Ge: return BinOp::Lt;
  case BinOp::Eq: return BinOp::Ne;
  case BinOp::Ne: return BinOp::Eq;
  default: return op;
  }
}

/// Bounds-consistency propagation over integer expressions (HC4-style
/// forward evaluation plus backward projection). Narrowing is sound:
/// a value is removed from a domain only if no solution uses it. Any
/// subexpression whose bounds might wrap is treated as unconstrained.
class Propagator {
public:
  explicit Propagator(std::vector<Interval> &doms) : doms_(doms) {}

  Interval forward(const Expr &e) const {
    switch (e.kind()) {
    case ExprKind::Const:
      return {e.value(), e.value()};
    case ExprKind::Var:
      return doms_[e.slot()];
    case ExprKind::Neg: {
      Interval a = forward(*e.operand());
      if (a.lo == kMin)
        return kTop;
      return {-a.hi, -a.lo};
    }
    case ExprKind::Not: {
      Interval a = forward(*e.operand());
      if (a.falsy())
        return {1, 1};
      if (a.truthy())
        return {0, 0};
      return kBool;
    }
    case ExprKind::Binary:
      return forward_binary(e.op(), forward(*e.lhs()), forward(*e.rhs()));
    }
    return kTop;
  }

  /// Restricts `e` to values in `req`. Returns false on proven infeasibility.
  bool narrow(const Expr &e, Interval req) {
    Interval cur = forward(e);
    Interval both = meet(cur, req);
    if (both.empty())
      return false;
    switch (e.kind()) {
    case ExprKind::Const:
      return true;
    case ExprKind::Var:
      doms_[e.slot()] = meet(doms_[e.slot()], req);
      return !doms_[e.slot()].empty();
    case ExprKind::Neg:
      if (both.lo == kMin)
        return true;
      return narrow(*e.operand(), {-both.hi, -both.lo});
    case ExprKind::Not:
      if (both.is(1))
        return narrow_truth(*e.operand(), false);
      if (both.is(0))
        return narrow_truth(*e.operand(), true);
      return true;
    case ExprKind::Binary:
      return narrow_binary(e, both);
    }
    return true;
  }

  bool narrow_truth(const Expr &e, bool want) {
    if (!want)
      return narrow(e, {0, 0});
    Interval f = forward(e);
    if (f.falsy())
      return false;
    if (f.lo == 0)
      return narrow(e, {1, f.hi});
    if (f.hi == 0)
      return narrow(e, {f.lo, -1});
    return true;
  }

private:
  static Interval forward_binary(BinOp op, Interval a, Interval b) {
    switch (op) {
    case BinOp::Add:
      return fit(i128(a.lo) + b.lo, i128(a.hi) + b.hi).value_or(kTop);
    case BinOp::Sub:
      return fit(i128(a.lo) - b.hi, i128(a.hi) - b.lo).value_or(kTop);
    case BinOp::Mul: {
      i128 c[] = {i128(a.lo) * b.lo, i128(a.lo) * b.hi, i128(a.hi) * b.lo,
                  i128(a.hi) * b.hi};
      return fit(*std::min_element(std::begin(c), std::end(c)),
                 *std::max_element(std::begin(c), std::end(c)))
          .value_or(kTop);
    }
    case BinOp::Lt:
      return decide(a.hi < b.lo, a.lo >= b.hi);
    case BinOp::Le:
      return decide(a.hi <= b.lo, a.lo > b.hi);
    case BinOp::Gt:
      return decide(a.lo > b.hi, a.hi <= b.lo);
    case BinOp::Ge:
      return decide(a.lo >= b.hi, a.hi < b.lo);
    case BinOp::Eq:
      return decide(a.singleton() && b.singleton() && a.lo == b.lo,
                    meet(a, b).empty());
    case BinOp::Ne:
      return decide(meet(a, b).empty(),
                    a.singleton() && b.singleton() && a.lo == b.lo);
    case BinOp::And:
      return decide(a.truthy() && b.truthy(), a.falsy() || b.falsy());
    case BinOp::Or:
      return decide(a.truthy() || b.truthy(), a.falsy() && b.falsy());
    }
    return kTop;
  }

  static Interval decide(bool always, bool never) {
    if (always)
      return {1, 1};
    if (never)
      return {0, 0};
    return kBool;
  }

  bool narrow_binary(const Expr &e, Interval req) {
    const Expr &l = *e.lhs();
    const Expr &r = *e.rhs();
    Interval a = forward(l);
    Interval b = forward(r);
    switch (e.op()) {
    case BinOp::Add:
      if (!fit(i128(a.lo) + b.lo, i128(a.hi) + b.hi))
        return true;
      return narrow(l, clamp(i128(req.lo) - b.hi, i128(req.hi) - b.lo)) &&
             narrow(r, clamp(i128(req.lo) - a.hi, i128(req.hi) - a.lo));
    case BinOp::Sub:
      if (!fit(i128(a.lo) - b.hi, i128(a.hi) - b.lo))
        return true;
      return narrow(l, clamp(i128(req.lo) + b.lo, i128(req.hi) + b.hi)) &&
             narrow(r, clamp(i128(a.lo) - req.hi, i128(a.hi) - req.lo));
    case BinOp::Mul:
      return true;
    case BinOp::And:
      if (req.is(1))
        return narrow_truth(l, true) && narrow_truth(r, true);
      if (req.is(0)) {
        if (a.truthy())
          return narrow_truth(r, false);
        if (b.truthy())
          return narrow_truth(l, false);
      }
      return true;
    case BinOp::Or:
      if (req.is(0))
        return narrow_truth(l, false) && narrow_truth(r, false);
      if (req.is(1)) {
        if (a.falsy())
          return narrow_truth(r, true);
        if (b.falsy())
          return narrow_truth(l, true);
      }
      return true;
    default:
      if (req.is(1))
        return narrow_comparison(e.op(), l, r, a, b);
      if (req.is(0))
        return narrow_comparison(negate_comparison(e.op()), l, r, a, b);
      return true;
    }
  }

  bool narrow_comparison(BinOp op, const Expr &l, const Expr &r, Interval a,
                         Interval b) {
    switch (op) {
    case BinOp::Lt:
      if (b.hi == kMin || a.lo == kMax)
        return false;
      return narrow(l, {kMin, b.hi - 1}) && narrow(r, {a.lo + 1, kMax});
    case BinOp::Le:
      return narrow(l, {kMin, b.hi}) && narrow(r, {a.lo, kMax});
    case BinOp::Gt:
      return narrow_comparison(BinOp::Lt, r, l, b, a);
    case BinOp::Ge:
      return narrow_comparison(BinOp::Le, r, l, b, a);
    case BinOp::Eq:
      return narrow(l, b) && narrow(r, a);
    case BinOp::Ne:
      return shave(l, a, b) && shave(r, b, a);
    default:
      return true;
    }
  }

  // x != c where the other side is the singleton c: trim c off x's bounds.
  bool shave(const Expr &x, Interval xs, Interval other) {
    if (!other.singleton())
      return true;
    std::int64_t c = other.lo;
    if (xs.is(c))
      return false;
    if (xs.lo == c)
      return narrow(x, {c + 1, xs.hi});
    if (xs.hi == c)
      return narrow(x, {xs.lo, c - 1});
    return true;
  }

  std::vector<Interval> &doms_;
};

constexpr int kMaxPropagationRounds = 64;

bool propagate(const std::vector<Constraint> &cs, std::vector<Interval> &doms) {
  Propagator p(doms);
  for (int round = 0; round < kMaxPropagationRounds; ++round) {
    auto before = doms;
    for (const auto &c : cs)
      if (!p.narrow_truth(*c.expr, c.taken))
        return false;
    for (const auto &d : doms)
      if (d.empty())
        return false;
    bool changed = false;
    for (std::size_t i = 0; i < doms.size(); ++i)
      if (doms[i].lo != before[i].lo || doms[i].hi != before[i].hi) {
        changed = true;
        break;
      }
    if (!changed)
      break;
  }
  return true;
}

/// Assigns `vars` in order, smallest value first, propagating after each
/// choice. The first complete assignment found is the lexicographic minimum.
bool search(const std::vector<Constraint> &cs,
            const std::vector<std::uint32_t> &vars, std::size_t next,
            std::vector<Interval> doms, std::vector<std::int64_t> &model) {
  if (next == vars.size()) {
    for (std::size_t i = 0; i < doms.size(); ++i)
      model[i] = doms[i].lo;
    for (const auto &c : cs)
      if (!c.holds(model))
        return false;
    return true;
  }
  const std::uint32_t v = vars[next];
  const Interval range = doms[v];
  for (std::int64_t value = range.lo;; ++value) {
    auto trial = doms;
    trial[v] = {value, value};
    if (propagate(cs, trial) && search(cs, vars, next + 1, trial, model))
      return true;
    if (value == range.hi)
      break;
  }
  return false;
}

void check_caps(std::span<const SymDecl> decls, std::uint64_t cap) {
  for (const auto &d : decls)
    if (d.size() > cap)
      throw DomainCapExceeded(d.name);
}

} // namespace

std::optional<std::vector<std::int64_t>>
solve(const PathCondition &pc, std::span<const SymDecl> decls,
      std::uint64_t domain_cap) {
  check_caps(decls, domain_cap);
  std::vector<Interval> doms;
  doms.reserve(decls.size());
  for (const auto &d : decls) {
    if (d.lo > d.hi)
      return std::nullopt;
    doms.push_back({d.lo, d.hi});
  }
  const auto &cs = pc.constraints();
  if (!propagate(cs, doms))
    return std::nullopt;
  std::vector<std::int64_t> model(decls.size());
  if (!search(cs, pc.mentioned(), 0, std::move(doms), model))
    return std::nullopt;
  return model;
}

Verdict check_sat(const PathCondition &pc, std::span<const SymDecl> decls,
                  std::uint64_t domain_cap) {
  return solve(pc, decls, domain_cap) ? Verdict::Sat : Verdict::Unsat;
}

Test get_model(const PathCondition &pc, std::span<const SymDecl> decls,
               std::uint64_t domain_cap) {
  auto m = solve(pc, decls, domain_cap);
  if (!m)
    throw UnsatModelRequest();
  return Test::from_inputs(decls, *m);
}

Solver::Solver(std::vector<SymDecl> decls, SolverOptions opts)
    : decls_(std::move(decls)), opts_(opts) {
  check_caps(decls_, opts_.domain_cap);
}

const CachedAnswer &Solver::query(const PathCondition &pc,
                                  CachedAnswer &scratch) {
  ++queries_;
  auto fresh = [&] {
    if (opts_.query_delay.count() > 0)
      std::this_thread::sleep_for(opts_.query_delay);
    CachedAnswer a;
    if (auto m = solve(pc, decls_, opts_.domain_cap)) {
      a.verdict = Verdict::Sat;
      a.model = std::move(*m);
    }
    return a;
  };
  if (!opts_.use_cache) {
    scratch = fresh();
    return scratch;
  }
  std::string key = QueryCache::canonical_key(pc);
  if (const CachedAnswer *hit = cache_.lookup(key))
    return *hit;
  scratch = fresh();
  cache_.insert(std::move(key), scratch);
  return scratch;
}

Verdict Solver::check_sat(const PathCondition &pc) {
  CachedAnswer scratch;
  return query(pc, scratch).verdict;
}

std::vector<std::int64_t> Solver::model_values(const PathCondition &pc) {
  CachedAnswer scratch;
  const CachedAnswer &a = query(pc, scratch);
  if (a.verdict != Verdict::Sat)
    throw UnsatModelRequest();
  return a.model;
}

Test Solver::get_model(const PathCondition &pc) {
  return Test::from_inputs(decls_, model_values(pc));
}

} // namespace tdp
