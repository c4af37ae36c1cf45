#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace tdp;
using namespace tdp::check;

namespace {

const std::vector<std::string> kXyz = {"x", "y", "z"};

std::vector<SymDecl> cube(std::int64_t lo, std::int64_t hi, std::size_t n = 3) {
  std::vector<SymDecl> d;
  for (std::size_t i = 0; i < n; ++i)
    d.push_back({kXyz[i], lo, hi});
  return d;
}

PathCondition pc_of(std::initializer_list<std::pair<const char *, bool>> cs) {
  PathCondition pc;
  for (auto [text, taken] : cs)
    pc.push(parse_expr(text, kXyz), taken);
  return pc;
}

// The six find_middle path conditions, ordered 01, 11, 000, 001, 100, 101.
PathCondition t1() { return pc_of({{"x<y", false}, {"x<z", true}}); }
PathCondition t2() { return pc_of({{"x<y", true}, {"y<z", true}}); }
PathCondition t3() {
  return pc_of({{"x<y", false}, {"x<z", false}, {"y<z", false}});
}
PathCondition t4() {
  return pc_of({{"x<y", false}, {"x<z", false}, {"y<z", true}});
}
PathCondition t5() {
  return pc_of({{"x<y", true}, {"y<z", false}, {"x<z", false}});
}
PathCondition t6() {
  return pc_of({{"x<y", true}, {"y<z", false}, {"x<z", true}});
}

ExprRef random_atom(Rng &rng, std::size_t nvars) {
  auto var = [&] {
    auto s = static_cast<std::uint32_t>(rng.range(0, nvars - 1));
    return Expr::var(kXyz[s], s);
  };
  auto term = [&]() -> ExprRef {
    switch (rng.range(0, 4)) {
    case 0:
      return Expr::constant(rng.range(-5, 5));
    case 1:
      return Expr::binary(BinOp::Add, var(), Expr::constant(rng.range(-3, 3)));
    case 2:
      return Expr::binary(BinOp::Mul, var(), Expr::constant(rng.range(-2, 2)));
    default:
      return var();
    }
  };
  auto op = static_cast<BinOp>(rng.range(static_cast<int>(BinOp::Lt),
                                         static_cast<int>(BinOp::Ne)));
  ExprRef a = Expr::binary(op, var(), term());
  if (rng.range(0, 9) == 0)
    a = Expr::binary(rng.coin() ? BinOp::And : BinOp::Or, a,
                     Expr::binary(BinOp::Lt, var(), term()));
  return a;
}

/// Lexicographically smallest satisfying assignment, by enumeration.
std::optional<std::vector<std::int64_t>>
brute_force(const PathCondition &pc, const std::vector<SymDecl> &decls) {
  std::optional<std::vector<std::int64_t>> found;
  for_each_assignment(decls, [&](const std::vector<std::int64_t> &v) {
    if (!found && pc.satisfied_by(v))
      found = v;
  });
  return found;
}

} // namespace

TEST(PathCondition, FindMiddlePrinting) {
  EXPECT_EQ(t1().to_string(), "(!(x<y) and (x<z))");
  EXPECT_EQ(t2().to_string(), "((x<y) and (y<z))");
  EXPECT_EQ(t3().to_string(), "(!(x<y) and !(x<z) and !(y<z))");
  EXPECT_EQ(t4().to_string(), "(!(x<y) and !(x<z) and (y<z))");
  EXPECT_EQ(t5().to_string(), "((x<y) and !(y<z) and !(x<z))");
  EXPECT_EQ(t6().to_string(), "((x<y) and !(y<z) and (x<z))");
  EXPECT_EQ(PathCondition().to_string(), "true");
}

TEST(PathCondition, DepthsAndParent) {
  PathCondition pc = t5();
  for (std::size_t i = 0; i < pc.size(); ++i)
    EXPECT_EQ(pc.constraints()[i].depth, i + 1);
  EXPECT_EQ(pc.parent().to_string(), "((x<y) and !(y<z))");
  EXPECT_EQ(pc.mentioned(), (std::vector<std::uint32_t>{0, 1, 2}));
}

TEST(SolvePath, Examples) {
  ExprRef x_lt_y = parse_expr("x<y", kXyz);
  std::int64_t a[] = {1, 0, 0};
  std::int64_t b[] = {0, 1, 2};
  EXPECT_FALSE(solve_path(a, *x_lt_y));
  EXPECT_TRUE(solve_path(b, *x_lt_y));
  EXPECT_FALSE(solve_path(a, *parse_expr("x<z", kXyz)));
  EXPECT_TRUE(solve_path(b, *parse_expr("y<z", kXyz)));
  EXPECT_TRUE(solve_path(a, *Expr::constant(1)));
}

TEST(EvaluateConcrete, Examples) {
  tdp::Test t({"x", "y", "z"}, {1, 0, 0});
  EXPECT_EQ(evaluate_concrete(*parse_expr("x<y", kXyz), t, {}), 0);
  tdp::Test u({"x", "y", "z"}, {0, 1, 2});
  EXPECT_EQ(evaluate_concrete(*parse_expr("x<y", kXyz), u, {}), 1);
  EXPECT_EQ(evaluate_concrete(*Expr::constant(7), t, {}), 7);
  std::vector<std::string> slots = {"x", "t"};
  EXPECT_EQ(evaluate_concrete(*parse_expr("x+t", slots), t, {{"t", 4}}), 5);
}

TEST(CheckSat, Examples) {
  EXPECT_EQ(check_sat(t3(), cube(-8, 8)), Verdict::Sat);
  EXPECT_EQ(check_sat(pc_of({{"x<y", true}, {"x<y", false}}), cube(-8, 8)),
            Verdict::Unsat);
}

TEST(GetModel, Examples) {
  EXPECT_EQ(get_model(t1(), cube(-8, 8)).to_string(), "{x=-8,y=-8,z=-7}");
  EXPECT_EQ(get_model(PathCondition(), cube(-8, 8)).to_string(),
            "{x=-8,y=-8,z=-8}");
  EXPECT_THROW(get_model(pc_of({{"x<y", true}, {"x<y", false}}), cube(-8, 8)),
               UnsatModelRequest);
}

TEST(GetModel, FindMiddleModelsReplay) {
  const Program &p = find_middle();
  const std::pair<PathCondition, const char *> rows[] = {
      {t1(), "01"}, {t2(), "11"}, {t3(), "000"},
      {t4(), "001"}, {t5(), "100"}, {t6(), "101"}};
  for (const auto &[pc, bits] : rows) {
    tdp::Test t = get_model(pc, p.inputs);
    ConcreteRun r = interpret(p, t.align(p.inputs));
    EXPECT_EQ(to_string(r.decisions), bits);
  }
}

TEST(Property, SolverMatchesEnumeration) {
  Rng rng(2024);
  int sat = 0;
  for (int i = 0; i < 1000; ++i) {
    std::size_t nvars = static_cast<std::size_t>(rng.range(1, 3));
    auto decls = cube(-4, 4, nvars);
    PathCondition pc;
    int n = static_cast<int>(rng.range(1, 3));
    for (int k = 0; k < n; ++k)
      pc.push(random_atom(rng, nvars), rng.coin());
    auto want = brute_force(pc, decls);
    ASSERT_EQ(check_sat(pc, decls) == Verdict::Sat, want.has_value())
        << pc.to_string();
    auto got = solve(pc, decls);
    ASSERT_EQ(got, want) << pc.to_string();
    if (want) {
      ++sat;
      EXPECT_TRUE(pc.satisfied_by(*got));
      EXPECT_EQ(get_model(pc, decls).values(), *want);
    }
  }
  EXPECT_GT(sat, 100);
  EXPECT_LT(sat, 1000);
}

TEST(Solve, DomainCap) {
  std::vector<SymDecl> d = {{"x", 0, 100}};
  EXPECT_THROW(solve(PathCondition(), d, 50), DomainCapExceeded);
}

TEST(TestValue, AlignChecksTotalityAndDomain) {
  auto decls = cube(-8, 8);
  EXPECT_EQ(tdp::Test({"z", "x", "y"}, {3, 1, 2}).align(decls),
            (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_THROW(tdp::Test({"x", "y"}, {1, 2}).align(decls), std::invalid_argument);
  EXPECT_THROW(tdp::Test({"x", "y", "z"}, {1, 2, 9}).align(decls),
               std::invalid_argument);
}

TEST(TestValue, WireRoundTrip) {
  tdp::Test t({"x", "long_name"}, {std::numeric_limits<std::int64_t>::min(), 42});
  std::vector<std::uint8_t> buf;
  ByteWriter w(buf);
  encode_test(t, w);
  ByteReader r(buf);
  EXPECT_EQ(decode_test(r), t);
  EXPECT_TRUE(r.at_end());
}

TEST(Cache, SecondQueryHits) {
  QueryCache cache;
  auto decls = cube(-8, 8);
  auto a = cache_query(cache, t1(), decls);
  auto b = cache_query(cache, t1(), decls);
  EXPECT_FALSE(a.hit);
  EXPECT_TRUE(b.hit);
  EXPECT_EQ(a.answer.verdict, b.answer.verdict);
  EXPECT_EQ(a.answer.model, b.answer.model);
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.misses(), 1u);
}

TEST(Cache, PermutationSharesKey) {
  PathCondition a = pc_of({{"x<y", true}, {"y<z", false}, {"x<z", false}});
  PathCondition b = pc_of({{"x<z", false}, {"x<y", true}, {"y<z", false}});
  EXPECT_EQ(QueryCache::canonical_key(a), QueryCache::canonical_key(b));
  QueryCache cache;
  cache_query(cache, a, cube(-8, 8));
  EXPECT_TRUE(cache_query(cache, b, cube(-8, 8)).hit);
}

TEST(Cache, RepeatedConstraintSharesKey) {
  PathCondition a = pc_of({{"x<y", true}});
  PathCondition b = pc_of({{"x<y", true}, {"x<y", true}});
  EXPECT_EQ(QueryCache::canonical_key(a), QueryCache::canonical_key(b));
  EXPECT_NE(QueryCache::canonical_key(a),
            QueryCache::canonical_key(pc_of({{"x<y", false}})));
}

TEST(Property, CacheIsPureMemo) {
  Rng rng(99);
  QueryCache cache;
  auto decls = cube(-4, 4);
  std::vector<PathCondition> pcs;
  for (int i = 0; i < 200; ++i) {
    PathCondition pc;
    auto n = rng.range(1, 3);
    for (int k = 0; k < n; ++k)
      pc.push(random_atom(rng, 3), rng.coin());
    pcs.push_back(pc);
  }
  for (int round = 0; round < 2; ++round)
    for (const auto &pc : pcs) {
      auto r = cache_query(cache, pc, decls);
      auto fresh = solve(pc, decls);
      EXPECT_EQ(r.answer.verdict == Verdict::Sat, fresh.has_value());
      if (fresh)
        EXPECT_EQ(r.answer.model, *fresh);
    }
  EXPECT_GE(cache.hits(), pcs.size());
}

TEST(Solver, CountsQueriesAndHits) {
  Solver s(cube(-8, 8));
  s.check_sat(t1());
  s.check_sat(t1());
  s.get_model(t2());
  EXPECT_EQ(s.queries(), 3u);
  EXPECT_EQ(s.cache_hits(), 1u);

  SolverOptions off;
  off.use_cache = false;
  Solver u(cube(-8, 8), off);
  u.check_sat(t1());
  u.check_sat(t1());
  EXPECT_EQ(u.cache_hits(), 0u);
}
