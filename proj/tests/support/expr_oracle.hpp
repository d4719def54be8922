#pragma once

// Test-only reference for the arithmetic evaluator. It owns its expression
// tree, renders it to text, and evaluates the tree with Boost's cpp_rational.
// Nothing here touches the library's parser, tree or Rational type.

#include <memory>
#include <optional>
#include <random>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace mmc::testing {

using BigRational = boost::multiprecision::cpp_rational;

struct OracleExpr {
  enum class Kind { Literal, Negate, Add, Sub, Mul, Div, Pow };
  Kind kind = Kind::Literal;
  std::string literal;  // decimal text for Literal
  std::unique_ptr<OracleExpr> a;
  std::unique_ptr<OracleExpr> b;
};

struct OracleValue {
  std::optional<BigRational> value;  // nullopt: division by zero somewhere
};

// cpp_int reads a leading 0 as an octal prefix, so strip leading zeros.
inline std::string decimal_digits(std::string digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string::npos ? "0" : digits.substr(first);
}

inline BigRational literal_value(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) return BigRational(boost::multiprecision::cpp_int(decimal_digits(text)));
  std::string digits = decimal_digits(text.substr(0, dot) + text.substr(dot + 1));
  boost::multiprecision::cpp_int num(digits);
  boost::multiprecision::cpp_int den = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
  return BigRational(num, den);
}

// Straight tree walk; exponents are integers by construction of the generator.
inline OracleValue oracle_eval(const OracleExpr& e) {
  using K = OracleExpr::Kind;
  if (e.kind == K::Literal) return {literal_value(e.literal)};
  OracleValue x = oracle_eval(*e.a);
  if (!x.value) return x;
  if (e.kind == K::Negate) return {-*x.value};
  OracleValue y = oracle_eval(*e.b);
  if (!y.value) return y;
  const BigRational& l = *x.value;
  const BigRational& r = *y.value;
  switch (e.kind) {
    case K::Add: return {l + r};
    case K::Sub: return {l - r};
    case K::Mul: return {l * r};
    case K::Div:
      if (r == 0) return {std::nullopt};
      return {l / r};
    case K::Pow: {
      const long k = static_cast<long>(boost::multiprecision::numerator(r));
      if (k < 0 && l == 0) return {std::nullopt};
      BigRational acc = 1;
      for (long i = 0; i < (k < 0 ? -k : k); ++i) acc *= l;
      if (k < 0) acc = BigRational(1) / acc;
      return {acc};
    }
    default: return {std::nullopt};
  }
}

inline std::string oracle_to_fraction(const BigRational& v) {
  const auto num = boost::multiprecision::numerator(v);
  const auto den = boost::multiprecision::denominator(v);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

// Random expressions with bounded values. Exponents are small integer
// literals, optionally negated, so every Pow node is well defined.
class ExprGenerator {
 public:
  explicit ExprGenerator(std::uint64_t seed) : rng_(seed) {}

  std::unique_ptr<OracleExpr> generate(int max_depth) { return node(max_depth); }

  // Renders with either minimal or redundant parentheses and a random mix of
  // ASCII and Unicode operator spellings.
  std::string render(const OracleExpr& e) { return render(e, pick(0, 1) == 0); }

 private:
  using K = OracleExpr::Kind;

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::unique_ptr<OracleExpr> literal() {
    auto e = std::make_unique<OracleExpr>();
    switch (pick(0, 3)) {
      case 0: e->literal = std::to_string(pick(0, 9)); break;
      case 1: e->literal = std::to_string(pick(10, 999)); break;
      case 2: e->literal = std::to_string(pick(0, 99)) + "." + std::to_string(pick(0, 9)); break;
      default: e->literal = std::to_string(pick(0, 9)) + "." + std::to_string(pick(10, 99)); break;
    }
    return e;
  }

  std::unique_ptr<OracleExpr> exponent() {
    auto lit = std::make_unique<OracleExpr>();
    lit->literal = std::to_string(pick(0, 3));
    if (pick(0, 3) != 0) return lit;
    auto neg = std::make_unique<OracleExpr>();
    neg->kind = K::Negate;
    neg->a = std::move(lit);
    return neg;
  }

  std::unique_ptr<OracleExpr> node(int depth) {
    if (depth <= 1 || pick(0, 5) == 0) return literal();
    auto e = std::make_unique<OracleExpr>();
    const int choice = pick(0, 11);
    if (choice < 2) {
      e->kind = K::Negate;
      e->a = node(depth - 1);
    } else if (choice < 4) {
      e->kind = K::Pow;
      // Small bases keep values bounded.
      e->a = depth > 2 && pick(0, 1) ? node(2) : literal();
      e->b = exponent();
    } else {
      static constexpr K ops[] = {K::Add, K::Sub, K::Mul, K::Div};
      e->kind = ops[pick(0, 3)];
      e->a = node(depth - 1);
      e->b = node(depth - 1);
    }
    return e;
  }

  static int precedence(const OracleExpr& e) {
    switch (e.kind) {
      case K::Add:
      case K::Sub: return 1;
      case K::Mul:
      case K::Div: return 2;
      case K::Negate: return 3;
      case K::Pow: return 4;
      case K::Literal: return 5;
    }
    return 5;
  }

  std::string symbol(K k) {
    const bool fancy = pick(0, 2) == 0;
    switch (k) {
      case K::Add: return "+";
      case K::Sub: return fancy ? "−" : "-";
      case K::Mul: return fancy ? "×" : "*";
      case K::Div: return fancy ? "÷" : "/";
      case K::Pow: return "^";
      default: return "?";
    }
  }

  std::string space() { return pick(0, 2) == 0 ? " " : ""; }

  std::string wrap(const std::string& s, bool need) { return need ? "(" + s + ")" : s; }

  std::string render(const OracleExpr& e, bool redundant) {
    if (e.kind == K::Literal) return e.literal;
    if (e.kind == K::Negate) {
      const bool need = redundant || precedence(*e.a) < 3;
      return symbol(K::Sub) + wrap(render(*e.a, redundant), need);
    }
    const int p = precedence(e);
    bool left_parens;
    bool right_parens;
    if (e.kind == K::Pow) {
      left_parens = precedence(*e.a) < 5;                        // -2^2 is -(2^2); pow is right-assoc
      right_parens = precedence(*e.b) < 3;                       // 2^-1 needs none
    } else {
      left_parens = precedence(*e.a) < p;
      right_parens = precedence(*e.b) <= p && precedence(*e.b) != 3;  // a*-b parses as a*(-b)
    }
    if (redundant) {
      left_parens = left_parens || e.a->kind != K::Literal;
      right_parens = right_parens || e.b->kind != K::Literal;
    }
    return wrap(render(*e.a, redundant), left_parens) + space() + symbol(e.kind) + space() +
           wrap(render(*e.b, redundant), right_parens);
  }

  std::mt19937_64 rng_;
};

}  // namespace mmc::testing
