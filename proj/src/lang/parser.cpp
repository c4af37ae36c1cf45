#include "tdp/lang.hpp"

#include <charconv>
#include <limits>
#include <unordered_map>

namespace tdp {

SyntaxError::SyntaxError(std::string message, std::size_t line,
                         std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      message_(std::move(message)), line_(line), column_(column) {}

namespace {

std::string join_diagnostics(const std::vector<std::string> &diags) {
  std::string out;
  for (const auto &d : diags) {
    if (!out.empty())
      out += "; ";
    out += d;
  }
  return out;
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : std::runtime_error("invalid program: " + join_diagnostics(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

namespace {

enum class Tok {
  End,
  Ident,
  Int,
  String,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Semi,
  Comma,
  Assign,
  Plus,
  Minus,
  Star,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  Ne,
  Bang,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint64_t magnitude = 0; // Int tokens
  std::size_t line = 1, column = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (is_ident_start(c)) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_]))
          advance();
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (c >= '0' && c <= '9') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9')
          advance();
        t.kind = Tok::Int;
        t.text = std::string(src_.substr(start, pos_ - start));
        auto [ptr, ec] = std::from_chars(t.text.data(),
                                         t.text.data() + t.text.size(),
                                         t.magnitude);
        if (ec != std::errc{} ||
            t.magnitude >
                static_cast<std::uint64_t>(
                    std::numeric_limits<std::int64_t>::max()) +
                    1)
          throw SyntaxError("integer literal out of range", t.line, t.column);
      } else if (c == '"') {
        advance();
        t.kind = Tok::String;
        for (;;) {
          if (pos_ >= src_.size() || src_[pos_] == '\n')
            throw SyntaxError("unterminated string", t.line, t.column);
          char s = src_[pos_];
          advance();
          if (s == '"')
            break;
          if (s == '\\' && pos_ < src_.size()) {
            s = src_[pos_];
            advance();
          }
          t.text += s;
        }
      } else {
        t.kind = punct(t);
      }
      out.push_back(std::move(t));
    }
  }

private:
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool peek_is(char c, std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() && src_[pos_ + ahead] == c;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#' || (c == '/' && peek_is('/', 1))) {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          advance();
      } else {
        break;
      }
    }
  }

  Tok punct(Token &t) {
    char c = src_[pos_];
    auto two = [&](char next, Tok two_kind, Tok one_kind) {
      advance();
      if (peek_is(next)) {
        advance();
        return two_kind;
      }
      return one_kind;
    };
    switch (c) {
    case '(': advance(); return Tok::LParen;
    case ')': advance(); return Tok::RParen;
    case '{': advance(); return Tok::LBrace;
    case '}': advance(); return Tok::RBrace;
    case '[': advance(); return Tok::LBracket;
    case ']': advance(); return Tok::RBracket;
    case ';': advance(); return Tok::Semi;
    case ',': advance(); return Tok::Comma;
    case '+': advance(); return Tok::Plus;
    case '-': advance(); return Tok::Minus;
    case '*': advance(); return Tok::Star;
    case '<': return two('=', Tok::Le, Tok::Lt);
    case '>': return two('=', Tok::Ge, Tok::Gt);
    case '=': return two('=', Tok::EqEq, Tok::Assign);
    case '!': return two('=', Tok::Ne, Tok::Bang);
    default:
      throw SyntaxError(std::string("unexpected character '") + c + "'",
                        t.line, t.column);
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1, col_ = 1;
};

/// Recursive-descent parser. Structured statements are lowered to basic
/// blocks as they are parsed.
class Parser {
public:
  Parser(std::vector<Token> toks, Program &prog)
      : toks_(std::move(toks)), prog_(prog) {}

  void parse_file() {
    if (!at_keyword("program"))
      fail("expected program header");
    next();
    prog_.name = expect_ident("program name");
    expect(Tok::Semi, "';'");

    while (at_keyword("sym"))
      parse_sym();
    for (const auto &d : prog_.inputs)
      intern(d.name);
    if (at_keyword("local"))
      parse_locals();

    if (at_keyword("block"))
      parse_block_form();
    else
      parse_structured();
  }

  /// Standalone expression over a fixed slot table.
  ExprRef parse_standalone_expr() {
    auto e = parse_expr();
    if (peek().kind != Tok::End)
      fail("unexpected trailing input");
    return e;
  }

  std::vector<std::string> take_diagnostics() { return std::move(diags_); }

  bool fixed_slots = false;

private:
  const Token &peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token &next() {
    const Token &t = peek();
    if (pos_ < toks_.size() - 1)
      ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string &msg) const {
    throw SyntaxError(msg, peek().line, peek().column);
  }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }
  void expect(Tok kind, const char *what) {
    if (peek().kind != kind)
      fail(std::string("expected ") + what);
    next();
  }
  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw))
      fail("expected '" + std::string(kw) + "'");
    next();
  }

  static bool is_reserved(std::string_view s) {
    static constexpr std::string_view kReserved[] = {
        "program", "sym",  "local", "in",   "if",  "else", "while",
        "exit",    "error", "block", "br",  "jump", "and", "or"};
    for (auto r : kReserved)
      if (r == s)
        return true;
    return false;
  }

  std::string expect_ident(const char *what) {
    if (peek().kind != Tok::Ident || is_reserved(peek().text))
      fail(std::string("expected ") + what);
    return next().text;
  }

  std::int64_t parse_int_literal() {
    bool negative = false;
    if (peek().kind == Tok::Minus) {
      next();
      negative = true;
    }
    if (peek().kind != Tok::Int)
      fail("expected integer");
    return literal_value(next(), negative);
  }

  std::int64_t literal_value(const Token &t, bool negative) {
    if (negative)
      return static_cast<std::int64_t>(0u - t.magnitude);
    if (t.magnitude >
        static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw SyntaxError("integer literal out of range", t.line, t.column);
    return static_cast<std::int64_t>(t.magnitude);
  }

  std::uint32_t intern(const std::string &name) {
    auto it = slot_index_.find(name);
    if (it != slot_index_.end())
      return it->second;
    if (fixed_slots)
      fail("unknown variable '" + name + "'");
    auto slot = static_cast<std::uint32_t>(prog_.slots.size());
    prog_.slots.push_back(name);
    slot_index_.emplace(name, slot);
    return slot;
  }

public:
  void preload_slots(std::span<const std::string> slots) {
    for (const auto &s : slots) {
      slot_index_.emplace(s, static_cast<std::uint32_t>(prog_.slots.size()));
      prog_.slots.push_back(s);
    }
  }

private:
  void parse_sym() {
    next();
    SymDecl d;
    d.name = expect_ident("input name");
    expect_keyword("in");
    expect(Tok::LBracket, "'['");
    d.lo = parse_int_literal();
    expect(Tok::Comma, "','");
    d.hi = parse_int_literal();
    expect(Tok::RBracket, "']'");
    expect(Tok::Semi, "';'");
    for (const auto &other : prog_.inputs)
      if (other.name == d.name)
        diags_.push_back("duplicate input '" + d.name + "'");
    prog_.inputs.push_back(std::move(d));
  }

  void parse_locals() {
    next();
    for (;;) {
      auto name = expect_ident("variable name");
      if (slot_index_.count(name))
        diags_.push_back("duplicate variable '" + name + "'");
      intern(name);
      if (peek().kind == Tok::Comma) {
        next();
        continue;
      }
      break;
    }
    expect(Tok::Semi, "';'");
  }

  // --- expressions -------------------------------------------------------

  ExprRef parse_expr() { return parse_or(); }

  ExprRef parse_or() {
    auto lhs = parse_and();
    while (at_keyword("or")) {
      next();
      lhs = Expr::binary(BinOp::Or, lhs, parse_and());
    }
    return lhs;
  }

  ExprRef parse_and() {
    auto lhs = parse_cmp();
    while (at_keyword("and")) {
      next();
      lhs = Expr::binary(BinOp::And, lhs, parse_cmp());
    }
    return lhs;
  }

  ExprRef parse_cmp() {
    auto lhs = parse_add();
    for (;;) {
      BinOp op;
      switch (peek().kind) {
      case Tok::Lt: op = BinOp::Lt; break;
      case Tok::Le: op = BinOp::Le; break;
      case Tok::Gt: op = BinOp::Gt; break;
      case Tok::Ge: op = BinOp::Ge; break;
      case Tok::EqEq: op = BinOp::Eq; break;
      case Tok::Ne: op = BinOp::Ne; break;
      default: return lhs;
      }
      next();
      lhs = Expr::binary(op, lhs, parse_add());
    }
  }

  ExprRef parse_add() {
    auto lhs = parse_mul();
    for (;;) {
      if (peek().kind == Tok::Plus) {
        next();
        lhs = Expr::binary(BinOp::Add, lhs, parse_mul());
      } else if (peek().kind == Tok::Minus) {
        next();
        lhs = Expr::binary(BinOp::Sub, lhs, parse_mul());
      } else {
        return lhs;
      }
    }
  }

  ExprRef parse_mul() {
    auto lhs = parse_unary();
    while (peek().kind == Tok::Star) {
      next();
      lhs = Expr::binary(BinOp::Mul, lhs, parse_unary());
    }
    return lhs;
  }

  ExprRef parse_unary() {
    if (peek().kind == Tok::Minus) {
      next();
      // `-7` is a literal; `-(e)` and `-x` negate.
      if (peek().kind == Tok::Int)
        return Expr::constant(literal_value(next(), true));
      return Expr::neg(parse_unary());
    }
    if (peek().kind == Tok::Bang) {
      next();
      return Expr::logical_not(parse_unary());
    }
    return parse_primary();
  }

  ExprRef parse_primary() {
    const Token &t = peek();
    if (t.kind == Tok::Int) {
      next();
      return Expr::constant(literal_value(t, false));
    }
    if (t.kind == Tok::LParen) {
      next();
      auto e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (t.kind == Tok::Ident && !is_reserved(t.text)) {
      std::string name = next().text;
      auto slot = intern(name);
      return Expr::var(std::move(name), slot);
    }
    fail("expected expression");
  }

  // --- structured form ---------------------------------------------------

  BlockId new_block() {
    BasicBlock b;
    b.name = "bb" + std::to_string(prog_.blocks.size());
    prog_.blocks.push_back(std::move(b));
    return static_cast<BlockId>(prog_.blocks.size() - 1);
  }

  Terminator &term(BlockId b) { return prog_.blocks[b].term; }

  void set_jump(BlockId from, BlockId to) {
    Terminator &t = term(from);
    t.kind = TermKind::Jump;
    t.jump.target = to;
  }

  void parse_structured() {
    prog_.entry = new_block();
    cur_ = prog_.entry;
    parse_stmts_until(Tok::End);
    if (term(cur_).kind == TermKind::None)
      term(cur_).kind = TermKind::Exit;
  }

  void parse_stmts_until(Tok closer) {
    while (peek().kind != closer) {
      if (peek().kind == Tok::End)
        fail("expected '}'");
      parse_stmt();
    }
  }

  // Statements following a terminator land in a fresh, unreachable block.
  void ensure_open_block() {
    if (term(cur_).kind != TermKind::None)
      cur_ = new_block();
  }

  void parse_stmt() {
    ensure_open_block();
    if (at_keyword("if")) {
      parse_if();
    } else if (at_keyword("while")) {
      parse_while();
    } else if (at_keyword("exit")) {
      next();
      expect(Tok::LParen, "'('");
      auto code = parse_int_literal();
      expect(Tok::RParen, "')'");
      expect(Tok::Semi, "';'");
      term(cur_).kind = TermKind::Exit;
      term(cur_).exit.code = code;
    } else if (at_keyword("error")) {
      auto label = parse_error_label();
      term(cur_).kind = TermKind::Error;
      term(cur_).error.label = std::move(label);
    } else if (peek().kind == Tok::Ident && !is_reserved(peek().text)) {
      prog_.blocks[cur_].instrs.push_back(parse_assign());
    } else {
      fail("expected statement");
    }
  }

  std::string parse_error_label() {
    next();
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::String)
      fail("expected string label");
    std::string label = next().text;
    expect(Tok::RParen, "')'");
    expect(Tok::Semi, "';'");
    return label;
  }

  Assign parse_assign() {
    std::string name = next().text;
    Assign a;
    a.slot = intern(name);
    expect(Tok::Assign, "'='");
    a.value = parse_expr();
    expect(Tok::Semi, "';'");
    return a;
  }

  ExprRef parse_condition() {
    expect(Tok::LParen, "'('");
    auto cond = parse_expr();
    expect(Tok::RParen, "')'");
    return cond;
  }

  void parse_body() {
    expect(Tok::LBrace, "'{'");
    parse_stmts_until(Tok::RBrace);
    expect(Tok::RBrace, "'}'");
  }

  void parse_if() {
    next();
    auto cond = parse_condition();
    BlockId head = cur_;
    BlockId then_b = new_block();
    BlockId else_b = new_block();
    BlockId join = new_block();
    term(head).kind = TermKind::Branch;
    term(head).branch = Branch{cond, then_b, else_b};

    cur_ = then_b;
    parse_body();
    if (term(cur_).kind == TermKind::None)
      set_jump(cur_, join);

    cur_ = else_b;
    if (at_keyword("else")) {
      next();
      if (at_keyword("if"))
        parse_if();
      else
        parse_body();
    }
    if (term(cur_).kind == TermKind::None)
      set_jump(cur_, join);
    cur_ = join;
  }

  void parse_while() {
    next();
    auto cond = parse_condition();
    BlockId header = new_block();
    BlockId body = new_block();
    BlockId done = new_block();
    set_jump(cur_, header);
    term(header).kind = TermKind::Branch;
    term(header).branch = Branch{cond, body, done};
    cur_ = body;
    parse_body();
    if (term(cur_).kind == TermKind::None)
      set_jump(cur_, header);
    cur_ = done;
  }

  // --- block form --------------------------------------------------------

  struct PendingTarget {
    BlockId block;
    int which; // 0: jump / true target, 1: false target
    std::string name;
  };

  void parse_block_form() {
    std::unordered_map<std::string, BlockId> by_name;
    std::vector<PendingTarget> pending;
    while (at_keyword("block")) {
      next();
      BasicBlock b;
      b.name = expect_ident("block name");
      auto id = static_cast<BlockId>(prog_.blocks.size());
      if (!by_name.emplace(b.name, id).second)
        diags_.push_back("duplicate block '" + b.name + "'");
      prog_.blocks.push_back(std::move(b));
      expect(Tok::LBrace, "'{'");
      while (peek().kind == Tok::Ident && !is_reserved(peek().text))
        prog_.blocks[id].instrs.push_back(parse_assign());
      Terminator &t = prog_.blocks[id].term;
      if (at_keyword("br")) {
        next();
        t.kind = TermKind::Branch;
        t.branch.cond = parse_condition();
        pending.push_back({id, 0, expect_ident("block name")});
        expect(Tok::Comma, "','");
        pending.push_back({id, 1, expect_ident("block name")});
        expect(Tok::Semi, "';'");
      } else if (at_keyword("jump")) {
        next();
        t.kind = TermKind::Jump;
        pending.push_back({id, 0, expect_ident("block name")});
        expect(Tok::Semi, "';'");
      } else if (at_keyword("exit")) {
        next();
        expect(Tok::LParen, "'('");
        t.kind = TermKind::Exit;
        t.exit.code = parse_int_literal();
        expect(Tok::RParen, "')'");
        expect(Tok::Semi, "';'");
      } else if (at_keyword("error")) {
        t.kind = TermKind::Error;
        t.error.label = parse_error_label();
      } else {
        fail("expected terminator");
      }
      expect(Tok::RBrace, "'}'");
    }
    if (peek().kind != Tok::End)
      fail("expected 'block'");
    prog_.entry = 0;

    for (const auto &p : pending) {
      auto it = by_name.find(p.name);
      if (it == by_name.end()) {
        diags_.push_back("undefined block '" + p.name + "'");
        continue;
      }
      Terminator &t = prog_.blocks[p.block].term;
      if (t.kind == TermKind::Jump)
        t.jump.target = it->second;
      else if (p.which == 0)
        t.branch.if_true = it->second;
      else
        t.branch.if_false = it->second;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Program &prog_;
  std::unordered_map<std::string, std::uint32_t> slot_index_;
  std::vector<std::string> diags_;
  BlockId cur_ = 0;
};

} // namespace

Program parse_program(std::string_view text, const ParseOptions &opts) {
  Program prog;
  Parser parser(Lexer(text).run(), prog);
  parser.parse_file();
  auto diags = parser.take_diagnostics();
  if (!diags.empty())
    throw ValidationError(std::move(diags));
  diags = validate(prog, opts);
  if (!diags.empty())
    throw ValidationError(std::move(diags));
  return prog;
}

ExprRef parse_expr(std::string_view text, std::span<const std::string> slots) {
  Program scratch;
  Parser parser(Lexer(text).run(), scratch);
  parser.preload_slots(slots);
  parser.fixed_slots = true;
  return parser.parse_standalone_expr();
}

} // namespace tdp
