#include "mmc/mathstep.hpp"

#include <utility>

#include "utf8.hpp"

namespace mmc::math {

// ---------------------------------------------------------------------------
// Errors

const char* to_string(MathErrc code) noexcept {
  switch (code) {
    case MathErrc::Lex: return "LexError";
    case MathErrc::Parse: return "ParseError";
    case MathErrc::EmptySegment: return "EmptySegment";
    case MathErrc::DivisionByZero: return "DivisionByZero";
    case MathErrc::NonIntegerExponent: return "NonIntegerExponent";
    case MathErrc::ExponentTooLarge: return "ExponentTooLarge";
  }
  return "MathError";
}

MathError::MathError(MathErrc code, std::string message, std::optional<std::size_t> position)
    : std::runtime_error(std::move(message)), code_(code), position_(position) {}

LexError::LexError(std::size_t position, std::string offending)
    : MathError(MathErrc::Lex,
                "unexpected character '" + offending + "' at position " + std::to_string(position),
                position),
      offending_(std::move(offending)) {}

ParseError::ParseError(std::size_t position, std::string expected)
    : MathError(MathErrc::Parse,
                "expected " + expected + " at position " + std::to_string(position), position),
      expected_(std::move(expected)) {}

EmptySegment::EmptySegment(std::size_t position)
    : MathError(MathErrc::EmptySegment,
                "'=' at position " + std::to_string(position) + " has an empty side", position) {}

EvalError::EvalError(MathErrc code, std::string message, std::optional<std::size_t> position)
    : MathError(code, std::move(message), position) {}

EvalError EvalError::with_expression_index(std::size_t index) const {
  EvalError copy = *this;
  copy.expression_index_ = index;
  return copy;
}

// ---------------------------------------------------------------------------
// Tokens

const char* to_string(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::Number: return "Number";
    case TokenKind::Operator: return "Operator";
    case TokenKind::LeftParen: return "LeftParen";
    case TokenKind::RightParen: return "RightParen";
    case TokenKind::Equals: return "Equals";
  }
  return "?";
}

const char* to_symbol(BinaryOp op) noexcept {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
  }
  return "?";
}

namespace {

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

std::optional<BinaryOp> operator_for(char32_t c) {
  switch (c) {
    case U'+': return BinaryOp::Add;
    case U'-':
    case U'−': return BinaryOp::Sub;
    case U'*':
    case U'×': return BinaryOp::Mul;
    case U'/':
    case U'÷': return BinaryOp::Div;
    case U'^': return BinaryOp::Pow;
    default: return std::nullopt;
  }
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  utf8::Cursor cur(text);

  while (!cur.done()) {
    const std::size_t start_byte = cur.byte_offset();
    const std::size_t start = cur.position();
    const auto c = cur.peek();
    if (!c) throw LexError(start, "invalid UTF-8");

    if (utf8::is_space(*c)) {
      cur.advance();
      continue;
    }

    if (is_digit(*c) || *c == U'.') {
      bool digits_before = false;
      while (cur.peek() && is_digit(*cur.peek())) {
        cur.advance();
        digits_before = true;
      }
      if (cur.peek() == U'.') {
        const std::size_t point = cur.position();
        cur.advance();
        bool digits_after = false;
        while (cur.peek() && is_digit(*cur.peek())) {
          cur.advance();
          digits_after = true;
        }
        if (!digits_after) throw LexError(point, ".");
      } else if (!digits_before) {
        throw LexError(start, ".");
      }
      tokens.push_back({TokenKind::Number,
                        std::string(text.substr(start_byte, cur.byte_offset() - start_byte)),
                        start});
      continue;
    }

    cur.advance();
    std::string lexeme(text.substr(start_byte, cur.byte_offset() - start_byte));
    if (auto op = operator_for(*c)) {
      tokens.push_back({TokenKind::Operator, std::move(lexeme), start, *op});
    } else if (*c == U'(') {
      tokens.push_back({TokenKind::LeftParen, std::move(lexeme), start});
    } else if (*c == U')') {
      tokens.push_back({TokenKind::RightParen, std::move(lexeme), start});
    } else if (*c == U'=') {
      tokens.push_back({TokenKind::Equals, std::move(lexeme), start});
    } else {
      throw LexError(start, std::move(lexeme));
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Tree

ExprPtr Expr::number(Rational value, std::size_t position) {
  return ExprPtr(new Expr{NumberNode{std::move(value)}, position});
}

ExprPtr Expr::negate(ExprPtr operand, std::size_t position) {
  return ExprPtr(new Expr{NegateNode{std::move(operand)}, position});
}

ExprPtr Expr::binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, std::size_t position) {
  return ExprPtr(new Expr{BinaryNode{op, std::move(lhs), std::move(rhs)}, position});
}

ExprPtr Expr::clone() const {
  if (const auto* n = std::get_if<NumberNode>(&node)) return number(n->value, position);
  if (const auto* n = std::get_if<NegateNode>(&node)) return negate(n->operand->clone(), position);
  const auto& b = std::get<BinaryNode>(node);
  return binary(b.op, b.lhs->clone(), b.rhs->clone(), position);
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* n = std::get_if<NumberNode>(&a.node)) {
    return n->value == std::get<NumberNode>(b.node).value;
  }
  if (const auto* n = std::get_if<NegateNode>(&a.node)) {
    return *n->operand == *std::get<NegateNode>(b.node).operand;
  }
  const auto& x = std::get<BinaryNode>(a.node);
  const auto& y = std::get<BinaryNode>(b.node);
  return x.op == y.op && *x.lhs == *y.lhs && *x.rhs == *y.rhs;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

constexpr int kMaxNesting = 256;

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, ParserOptions options)
      : tokens_(tokens), options_(options) {}

  ExprPtr parse() {
    if (tokens_.empty()) throw ParseError(0, "expression");
    ExprPtr e = parse_sum();
    if (!at_end()) throw ParseError(peek().position, "operator or end of expression");
    return e;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }

  std::size_t end_position() const {
    if (tokens_.empty()) return 0;
    const Token& last = tokens_.back();
    return last.position + utf8::length(last.lexeme);
  }

  std::size_t here() const { return at_end() ? end_position() : peek().position; }

  bool at_operator(BinaryOp a, BinaryOp b) const {
    return !at_end() && peek().kind == TokenKind::Operator && (peek().op == a || peek().op == b);
  }

  ExprPtr parse_sum() {
    ExprPtr lhs = parse_product();
    while (at_operator(BinaryOp::Add, BinaryOp::Sub)) {
      const Token& t = tokens_[pos_++];
      lhs = Expr::binary(t.op, std::move(lhs), parse_product(), t.position);
    }
    return lhs;
  }

  ExprPtr parse_product() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      if (at_operator(BinaryOp::Mul, BinaryOp::Div)) {
        const Token& t = tokens_[pos_++];
        lhs = Expr::binary(t.op, std::move(lhs), parse_unary(), t.position);
      } else if (options_.implicit_multiplication && juxtaposed()) {
        const std::size_t at = peek().position;
        lhs = Expr::binary(BinaryOp::Mul, std::move(lhs), parse_power(), at);
      } else {
        return lhs;
      }
    }
  }

  // "2(3)", "(1)(2)" and "(1)2" multiply; "2 3" does not.
  bool juxtaposed() const {
    if (at_end() || pos_ == 0) return false;
    if (peek().kind == TokenKind::LeftParen) return true;
    return peek().kind == TokenKind::Number && tokens_[pos_ - 1].kind == TokenKind::RightParen;
  }

  ExprPtr parse_unary() {
    if (at_operator(BinaryOp::Sub, BinaryOp::Sub)) {
      const Token& t = tokens_[pos_++];
      Nest guard(*this, t.position);
      return Expr::negate(parse_unary(), t.position);
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (at_operator(BinaryOp::Pow, BinaryOp::Pow)) {
      const Token& t = tokens_[pos_++];
      Nest guard(*this, t.position);
      return Expr::binary(BinaryOp::Pow, std::move(base), parse_unary(), t.position);
    }
    return base;
  }

  ExprPtr parse_primary() {
    if (at_end()) throw ParseError(here(), "number or '('");
    const Token& t = peek();
    if (t.kind == TokenKind::Number) {
      ++pos_;
      return Expr::number(Rational::from_decimal(t.lexeme), t.position);
    }
    if (t.kind == TokenKind::LeftParen) {
      ++pos_;
      Nest guard(*this, t.position);
      ExprPtr inner = parse_sum();
      if (at_end() || peek().kind != TokenKind::RightParen) throw ParseError(here(), "')'");
      ++pos_;
      return inner;
    }
    throw ParseError(t.position, "number or '('");
  }

  struct Nest {
    Nest(Parser& p, std::size_t at) : parser(p) {
      if (++parser.depth_ > kMaxNesting) throw ParseError(at, "shallower nesting");
    }
    ~Nest() { --parser.depth_; }
    Parser& parser;
  };

  const std::vector<Token>& tokens_;
  ParserOptions options_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

ExprPtr parse_expression(const std::vector<Token>& tokens, ParserOptions options) {
  return Parser(tokens, options).parse();
}

ExprPtr parse_expression(std::string_view text, ParserOptions options) {
  return parse_expression(tokenize(text), options);
}

// ---------------------------------------------------------------------------
// Evaluation and printing

Rational evaluate(const Expr& expr) {
  if (const auto* n = std::get_if<NumberNode>(&expr.node)) return n->value;
  if (const auto* n = std::get_if<NegateNode>(&expr.node)) return -evaluate(*n->operand);

  const auto& b = std::get<BinaryNode>(expr.node);
  Rational lhs = evaluate(*b.lhs);
  Rational rhs = evaluate(*b.rhs);
  try {
    switch (b.op) {
      case BinaryOp::Add: return lhs + rhs;
      case BinaryOp::Sub: return lhs - rhs;
      case BinaryOp::Mul: return lhs * rhs;
      case BinaryOp::Div: return lhs / rhs;
      case BinaryOp::Pow: return lhs.pow(rhs);
    }
  } catch (const EvalError& e) {
    if (e.position()) throw;
    throw EvalError(e.code(), e.what(), expr.position);
  }
  return {};
}

std::string to_string(const Expr& expr) {
  if (const auto* n = std::get_if<NumberNode>(&expr.node)) {
    if (auto dec = n->value.to_decimal_string(); dec && n->value >= Rational(0)) return *dec;
    if (n->value.is_integer()) return "(" + n->value.to_string() + ")";
    return "(" + n->value.numerator().get_str() + "/" + n->value.denominator().get_str() + ")";
  }
  if (const auto* n = std::get_if<NegateNode>(&expr.node)) {
    return "(-" + to_string(*n->operand) + ")";
  }
  const auto& b = std::get<BinaryNode>(expr.node);
  return "(" + to_string(*b.lhs) + " " + to_symbol(b.op) + " " + to_string(*b.rhs) + ")";
}

// ---------------------------------------------------------------------------
// Equality chains

EqualityChain parse_chain(std::string_view text, ParserOptions options) {
  const std::vector<Token> tokens = tokenize(text);
  EqualityChain chain;

  std::vector<Token> segment;
  std::optional<std::size_t> last_equals;
  int depth = 0;
  auto flush = [&](std::optional<std::size_t> closing_equals) {
    if (segment.empty()) {
      if (closing_equals) throw EmptySegment(*closing_equals);
      if (last_equals) throw EmptySegment(*last_equals);
      throw ParseError(0, "expression");
    }
    chain.exprs.push_back(parse_expression(segment, options));
    segment.clear();
  };

  for (const Token& t : tokens) {
    if (t.kind == TokenKind::LeftParen) ++depth;
    if (t.kind == TokenKind::RightParen) --depth;
    if (t.kind == TokenKind::Equals && depth == 0) {
      flush(t.position);
      last_equals = t.position;
      continue;
    }
    segment.push_back(t);
  }
  flush(std::nullopt);
  return chain;
}

ChainResult check_chain(const EqualityChain& chain) {
  ChainResult result;
  result.values.reserve(chain.exprs.size());
  for (std::size_t i = 0; i < chain.exprs.size(); ++i) {
    try {
      result.values.push_back(evaluate(*chain.exprs[i]));
    } catch (const EvalError& e) {
      throw e.with_expression_index(i);
    }
  }
  for (std::size_t i = 1; i < result.values.size(); ++i) {
    if (result.values[i - 1] != result.values[i]) {
      result.first_failure = ChainFailure{i, result.values[i - 1], result.values[i]};
      break;
    }
  }
  return result;
}

}  // namespace mmc::math
