#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdp {

//===----------------------------------------------------------------------===//
// Expressions
//===----------------------------------------------------------------------===//

enum class ExprKind : std::uint8_t { Const, Var, Neg, Not, Binary };

enum class BinOp : std::uint8_t { Add, Sub, Mul, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

std::string_view to_string(BinOp op);
bool is_comparison(BinOp op);

class Expr;
using ExprRef = std::shared_ptr<const Expr>;

/// Immutable integer expression. Variables carry both their name and the
/// program slot they were resolved to; symbolic inputs occupy the first
/// slots, in declaration order.
class Expr {
public:
  static ExprRef constant(std::int64_t value);
  static ExprRef var(std::string name, std::uint32_t slot);
  static ExprRef neg(ExprRef operand);
  static ExprRef logical_not(ExprRef operand);
  static ExprRef binary(BinOp op, ExprRef lhs, ExprRef rhs);

  ExprKind kind() const { return kind_; }
  std::int64_t value() const { return value_; }
  const std::string &name() const { return name_; }
  std::uint32_t slot() const { return slot_; }
  BinOp op() const { return op_; }
  const ExprRef &lhs() const { return lhs_; }
  const ExprRef &rhs() const { return rhs_; }
  /// Operand of Neg / Not.
  const ExprRef &operand() const { return lhs_; }

  bool is_constant() const { return kind_ == ExprKind::Const; }

private:
  ExprKind kind_ = ExprKind::Const;
  std::int64_t value_ = 0;
  std::string name_;
  std::uint32_t slot_ = 0;
  BinOp op_ = BinOp::Add;
  ExprRef lhs_, rhs_;
};

bool structurally_equal(const Expr &a, const Expr &b);
bool structurally_equal(const ExprRef &a, const ExprRef &b);

/// Compact textual form, e.g. `(x<y)`, `!(x<y)`, `((a+1) and (b!=2))`.
/// The output is accepted by the expression grammar and reparses to an
/// equal tree.
std::string to_string(const Expr &e);

/// Applies an operator with wrapping 64-bit semantics.
std::int64_t apply(BinOp op, std::int64_t lhs, std::int64_t rhs);

/// Evaluates `e` with every variable read from `slots[e.slot()]`. Unbound
/// slots (nullopt) raise UnboundVariable.
std::int64_t evaluate(const Expr &e,
                      std::span<const std::optional<std::int64_t>> slots);

/// Fast path for fully bound valuations (symbolic expressions over inputs).
std::int64_t evaluate(const Expr &e, std::span<const std::int64_t> slots);

/// Collects the slots mentioned by `e` into `out` (sorted, unique).
void collect_slots(const Expr &e, std::vector<std::uint32_t> &out);

class UnboundVariable : public std::runtime_error {
public:
  explicit UnboundVariable(const std::string &name)
      : std::runtime_error("unbound variable '" + name + "'"), name_(name) {}
  const std::string &name() const { return name_; }

private:
  std::string name_;
};

//===----------------------------------------------------------------------===//
// Programs
//===----------------------------------------------------------------------===//

/// Default cap on the number of values in one symbolic input domain.
inline constexpr std::uint64_t kDefaultDomainCap = 65536;

struct SymDecl {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  /// Number of values in [lo, hi]; 0 when the domain is empty.
  std::uint64_t size() const;
  bool operator==(const SymDecl &) const = default;
};

using BlockId = std::uint32_t;

struct Assign {
  std::uint32_t slot = 0;
  ExprRef value;
};

struct Branch {
  ExprRef cond;
  BlockId if_true = 0;
  BlockId if_false = 0;
};

struct Jump {
  BlockId target = 0;
};

struct Exit {
  std::int64_t code = 0;
};

struct Error {
  std::string label;
};

enum class TermKind : std::uint8_t { None, Branch, Jump, Exit, Error };

struct Terminator {
  TermKind kind = TermKind::None;
  Branch branch;
  Jump jump;
  Exit exit;
  Error error;
};

struct BasicBlock {
  std::string name;
  std::vector<Assign> instrs;
  Terminator term;
};

/// Parsed and lowered subject program. Immutable once validated.
struct Program {
  std::string name;
  std::vector<SymDecl> inputs;
  /// Names of all variable slots; inputs first, then locals in order of
  /// first appearance.
  std::vector<std::string> slots;
  std::vector<BasicBlock> blocks;
  BlockId entry = 0;

  std::size_t num_inputs() const { return inputs.size(); }
  std::optional<std::uint32_t> slot_of(std::string_view var) const;
};

bool structurally_equal(const Program &a, const Program &b);

struct ParseOptions {
  std::uint64_t domain_cap = kDefaultDomainCap;
};

class SyntaxError : public std::runtime_error {
public:
  SyntaxError(std::string message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string &message() const { return message_; }

private:
  std::string message_;
  std::size_t line_, column_;
};

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(std::vector<std::string> diagnostics);
  const std::vector<std::string> &diagnostics() const { return diagnostics_; }

private:
  std::vector<std::string> diagnostics_;
};

/// Parses `.tdp` source text (structured or block form) into a validated
/// Program. Throws SyntaxError or ValidationError.
Program parse_program(std::string_view text, const ParseOptions &opts = {});

/// Parses a standalone expression over the given slot names. Used by tests
/// and by the constraint printer round-trip.
ExprRef parse_expr(std::string_view text, std::span<const std::string> slots);

/// Returns every invariant violation; an empty list means the program is
/// well formed.
std::vector<std::string> validate(const Program &program,
                                  const ParseOptions &opts = {});

/// Prints the program in block form. parse_program(print_program(p)) is
/// structurally equal to p.
std::string print_program(const Program &program);

//===----------------------------------------------------------------------===//
// Concrete interpretation
//===----------------------------------------------------------------------===//

enum class RunOutcome : std::uint8_t { Exit, Error, StepLimit };

struct ConcreteRun {
  RunOutcome outcome = RunOutcome::Exit;
  std::int64_t exit_code = 0;
  std::string error_label;
  /// Decisions of branches whose condition depends on a symbolic input
  /// (1 = true). Branches on input-independent values are not recorded.
  std::vector<bool> decisions;
  std::uint64_t steps = 0;
};

/// Runs `program` on concrete `inputs` (declaration order), tracking which
/// values derive from symbolic inputs.
ConcreteRun interpret(const Program &program,
                      std::span<const std::int64_t> inputs,
                      std::uint64_t max_steps = 10'000'000);

} // namespace tdp
