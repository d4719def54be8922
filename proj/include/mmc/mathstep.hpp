#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mmc/math_error.hpp"
#include "mmc/rational.hpp"

// Tokenizer, parser and exact evaluator for the arithmetic found in student
// steps: integers, decimals, + - × ÷ ^, parentheses and `=` chains.
namespace mmc::math {

enum class TokenKind { Number, Operator, LeftParen, RightParen, Equals };

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Token {
  TokenKind kind;
  std::string lexeme;        // source text as written (e.g. "×")
  std::size_t position = 0;  // code point offset
  BinaryOp op = BinaryOp::Add;  // canonical operator, Operator tokens only
};

const char* to_string(TokenKind kind) noexcept;
// Canonical ASCII spelling: + - * / ^
const char* to_symbol(BinaryOp op) noexcept;

// Throws LexError on any character outside the arithmetic alphabet.
std::vector<Token> tokenize(std::string_view text);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct NumberNode {
  Rational value;
};
struct NegateNode {
  ExprPtr operand;
};
struct BinaryNode {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Expr {
  std::variant<NumberNode, NegateNode, BinaryNode> node;
  std::size_t position = 0;

  static ExprPtr number(Rational value, std::size_t position = 0);
  static ExprPtr negate(ExprPtr operand, std::size_t position = 0);
  static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, std::size_t position = 0);

  ExprPtr clone() const;
};

// Structural equality; source positions are ignored.
bool operator==(const Expr& a, const Expr& b);

struct ParserOptions {
  // Accept juxtaposition such as "2(3+4)" or "(1+2)(3+4)" as multiplication.
  bool implicit_multiplication = false;
};

// Precedence, low to high: + - | * / | unary minus | ^ (right-associative).
// Throws ParseError; Equals tokens are rejected.
ExprPtr parse_expression(const std::vector<Token>& tokens, ParserOptions options = {});
ExprPtr parse_expression(std::string_view text, ParserOptions options = {});

Rational evaluate(const Expr& expr);

// Fully parenthesized rendering; reparses to a structurally identical tree.
std::string to_string(const Expr& expr);

struct EqualityChain {
  std::vector<ExprPtr> exprs;  // size >= 1
};

// Splits on top-level `=`. Throws LexError, ParseError or EmptySegment.
EqualityChain parse_chain(std::string_view text, ParserOptions options = {});

struct ChainFailure {
  std::size_t equality_index;  // 1-based: exprs[i-1] vs exprs[i]
  Rational lhs_value;
  Rational rhs_value;
};

struct ChainResult {
  std::vector<Rational> values;  // one per expression
  std::optional<ChainFailure> first_failure;

  bool holds() const noexcept { return !first_failure.has_value(); }
};

// Throws EvalError tagged with the offending expression index.
ChainResult check_chain(const EqualityChain& chain);

}  // namespace mmc::math
