#pragma once

#include "tdp/bytes.hpp"
#include "tdp/lang.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tdp {

//===----------------------------------------------------------------------===//
// Path conditions
//===----------------------------------------------------------------------===//

/// One symbolic branch decision. `expr` is the branch condition over
/// symbolic inputs; `taken` is the side that was followed.
struct Constraint {
  ExprRef expr;
  bool taken = true;
  std::uint32_t depth = 0;

  /// True iff the decision holds under a full input assignment.
  bool holds(std::span<const std::int64_t> inputs) const {
    return (evaluate(*expr, inputs) != 0) == taken;
  }
};

/// Prints `(x<y)` for a taken-true constraint and `!(x<y)` for taken-false.
std::string to_string(const Constraint &c);

/// Ordered conjunction of constraints, one per symbolic branch depth.
class PathCondition {
public:
  const std::vector<Constraint> &constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }
  bool empty() const { return constraints_.empty(); }

  /// Appends a constraint at depth size()+1.
  void push(ExprRef expr, bool taken);
  PathCondition extended(ExprRef expr, bool taken) const;
  /// Condition of the parent prefix (last constraint removed).
  PathCondition parent() const;

  /// Input slots mentioned by any constraint, ascending.
  std::vector<std::uint32_t> mentioned() const;
  bool satisfied_by(std::span<const std::int64_t> inputs) const;

  /// `(c1 and c2 and ...)`; `true` for the empty condition.
  std::string to_string() const;

private:
  std::vector<Constraint> constraints_;
};

//===----------------------------------------------------------------------===//
// Tests
//===----------------------------------------------------------------------===//

/// A concrete assignment to symbolic inputs.
class Test {
public:
  Test() = default;
  Test(std::vector<std::string> names, std::vector<std::int64_t> values);
  static Test from_inputs(std::span<const SymDecl> decls,
                          std::span<const std::int64_t> values);

  const std::vector<std::string> &names() const { return names_; }
  const std::vector<std::int64_t> &values() const { return values_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::int64_t> get(std::string_view name) const;

  /// Values in the order of `decls`. Throws std::invalid_argument if the
  /// test is not total over `decls` or a value lies outside its domain.
  std::vector<std::int64_t> align(std::span<const SymDecl> decls) const;

  /// `{x=1,y=0,z=0}`
  std::string to_string() const;

  bool operator==(const Test &) const = default;

private:
  std::vector<std::string> names_;
  std::vector<std::int64_t> values_;
};

/// Wire form: u16 count, then per entry u16 name length, name bytes,
/// i64 value; all big-endian.
void encode_test(const Test &t, ByteWriter &out);
Test decode_test(ByteReader &in);

//===----------------------------------------------------------------------===//
// Solving
//===----------------------------------------------------------------------===//

enum class Verdict : std::uint8_t { Sat, Unsat };

class DomainCapExceeded : public std::runtime_error {
public:
  explicit DomainCapExceeded(const std::string &input)
      : std::runtime_error("domain of '" + input + "' exceeds the solver cap") {}
};

class UnsatModelRequest : public std::logic_error {
public:
  UnsatModelRequest()
      : std::logic_error("model requested for an unsatisfiable condition") {}
};

/// Lexicographically smallest (declaration order) assignment within the
/// declared domains satisfying `pc`, or nullopt when none exists.
std::optional<std::vector<std::int64_t>>
solve(const PathCondition &pc, std::span<const SymDecl> decls,
      std::uint64_t domain_cap = kDefaultDomainCap);

Verdict check_sat(const PathCondition &pc, std::span<const SymDecl> decls,
                  std::uint64_t domain_cap = kDefaultDomainCap);

/// Throws UnsatModelRequest when `pc` is unsatisfiable.
Test get_model(const PathCondition &pc, std::span<const SymDecl> decls,
               std::uint64_t domain_cap = kDefaultDomainCap);

/// True iff the branch condition evaluates non-zero under the test.
bool solve_path(std::span<const std::int64_t> test, const Expr &cond);

/// Evaluates an expression over program variables: symbolic inputs come
/// from the test, everything else from `env` (keyed by variable name).
std::int64_t
evaluate_concrete(const Expr &expr, const Test &test,
                  const std::unordered_map<std::string, std::int64_t> &env);

//===----------------------------------------------------------------------===//
// Query cache
//===----------------------------------------------------------------------===//

struct CachedAnswer {
  Verdict verdict = Verdict::Unsat;
  std::vector<std::int64_t> model; // empty when Unsat
};

/// Memo of solver answers keyed by the sorted, deduplicated, printed
/// constraint list.
class QueryCache {
public:
  static std::string canonical_key(const PathCondition &pc);

  const CachedAnswer *lookup(const std::string &key);
  void insert(std::string key, CachedAnswer answer);

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::size_t size() const { return entries_.size(); }

private:
  std::unordered_map<std::string, CachedAnswer> entries_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

struct QueryResult {
  CachedAnswer answer;
  bool hit = false;
};

QueryResult cache_query(QueryCache &cache, const PathCondition &pc,
                        std::span<const SymDecl> decls,
                        std::uint64_t domain_cap = kDefaultDomainCap);

struct SolverOptions {
  bool use_cache = true;
  std::uint64_t domain_cap = kDefaultDomainCap;
  /// Artificial latency added to every query that reaches the solver.
  std::chrono::microseconds query_delay{0};
};

/// Per-worker solver front end: optional cache plus counters.
class Solver {
public:
  Solver(std::vector<SymDecl> decls, SolverOptions opts = {});

  Verdict check_sat(const PathCondition &pc);
  /// Throws UnsatModelRequest when `pc` is unsatisfiable.
  Test get_model(const PathCondition &pc);
  std::vector<std::int64_t> model_values(const PathCondition &pc);

  const std::vector<SymDecl> &decls() const { return decls_; }
  std::uint64_t queries() const { return queries_; }
  std::uint64_t cache_hits() const { return cache_.hits(); }
  const SolverOptions &options() const { return opts_; }

private:
  const CachedAnswer &query(const PathCondition &pc, CachedAnswer &scratch);

  std::vector<SymDecl> decls_;
  SolverOptions opts_;
  QueryCache cache_;
  std::uint64_t queries_ = 0;
};

} // namespace tdp
