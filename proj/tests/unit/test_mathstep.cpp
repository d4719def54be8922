#include "doctest.h"

#include <algorithm>
#include <random>

#include "mmc/mathstep.hpp"
#include "../support/expr_oracle.hpp"

using namespace mmc::math;

namespace {

std::string value_of(std::string_view text) { return evaluate(*parse_expression(text)).to_string(); }

}  // namespace

TEST_SUITE("tokenize") {
  TEST_CASE("numbers and operators") {
    auto t = tokenize("18+2×3");
    REQUIRE(t.size() == 5);
    CHECK(t[0].kind == TokenKind::Number);
    CHECK(t[0].lexeme == "18");
    CHECK(t[1].kind == TokenKind::Operator);
    CHECK(t[1].op == BinaryOp::Add);
    CHECK(t[3].lexeme == "×");
    CHECK(t[3].op == BinaryOp::Mul);
    CHECK(t[4].lexeme == "3");
    CHECK(t[4].position == 5);  // code points, not bytes
  }

  TEST_CASE("unicode division and minus are normalized") {
    auto t = tokenize("7 ÷ 2 − 1");
    REQUIRE(t.size() == 5);
    CHECK(t[1].op == BinaryOp::Div);
    CHECK(t[3].op == BinaryOp::Sub);
  }

  TEST_CASE("positions strictly increase") {
    auto t = tokenize(" (1.5 + 2) ^ 3 = 42.875 ");
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i - 1].position < t[i].position);
    CHECK(t.back().kind == TokenKind::Number);
    CHECK(t[t.size() - 2].kind == TokenKind::Equals);
  }

  TEST_CASE("letters are a lex error at their position") {
    try {
      tokenize("2x+1");
      FAIL("expected LexError");
    } catch (const LexError& e) {
      CHECK(e.position() == 1);
      CHECK(e.offending() == "x");
    }
  }

  TEST_CASE("dangling decimal point") {
    CHECK_THROWS_AS(tokenize("3."), LexError);
    CHECK_THROWS_AS(tokenize(". 5"), LexError);
    CHECK(tokenize(".5").size() == 1);
  }
}

TEST_SUITE("parse_expression") {
  TEST_CASE("multiplication binds tighter than addition") {
    auto e = parse_expression("3+4*5");
    auto expected = Expr::binary(BinaryOp::Add, Expr::number(3),
                                 Expr::binary(BinaryOp::Mul, Expr::number(4), Expr::number(5)));
    CHECK(*e == *expected);
  }

  TEST_CASE("power is right-associative") {
    auto e = parse_expression("2^3^2");
    auto expected = Expr::binary(BinaryOp::Pow, Expr::number(2),
                                 Expr::binary(BinaryOp::Pow, Expr::number(3), Expr::number(2)));
    CHECK(*e == *expected);
    CHECK(value_of("2^3^2") == "512");
  }

  TEST_CASE("subtraction and division are left-associative") {
    CHECK(value_of("10-4-3") == "3");
    CHECK(value_of("64/4/2") == "8");
  }

  TEST_CASE("unary minus sits between product and power") {
    CHECK(value_of("-2^2") == "-4");
    CHECK(value_of("(-2)^2") == "4");
    CHECK(value_of("2^-2") == "1/4");
    CHECK(value_of("3*-2") == "-6");
    CHECK(value_of("--3") == "3");
  }

  TEST_CASE("malformed input") {
    try {
      parse_expression("3+*5");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(parse_expression("(1+2"), ParseError);
    CHECK_THROWS_AS(parse_expression("1+2)"), ParseError);
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("1 = 1"), ParseError);
    CHECK_THROWS_AS(parse_expression("2 3"), ParseError);
  }

  TEST_CASE("implicit multiplication is opt-in") {
    CHECK_THROWS_AS(parse_expression("2(3+4)"), ParseError);
    ParserOptions opts;
    opts.implicit_multiplication = true;
    CHECK(evaluate(*parse_expression("2(3+4)", opts)).to_string() == "14");
    CHECK(evaluate(*parse_expression("(1+2)(3+4)", opts)).to_string() == "21");
    CHECK(evaluate(*parse_expression("(1+2)2^2", opts)).to_string() == "12");
    CHECK_THROWS_AS(parse_expression("2 3", opts), ParseError);
  }

  TEST_CASE("deep nesting is bounded") {
    std::string deep(1000, '(');
    deep += "1";
    deep += std::string(1000, ')');
    CHECK_THROWS_AS(parse_expression(deep), ParseError);
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("examples") {
    CHECK(value_of("(3+4)*5") == "35");
    CHECK(value_of("0.1+0.2") == "3/10");
    CHECK(value_of("7 ÷ 2") == "7/2");
  }

  TEST_CASE("division by zero carries the operator position") {
    try {
      evaluate(*parse_expression("1/0"));
      FAIL("expected DivisionByZero");
    } catch (const EvalError& e) {
      CHECK(e.code() == MathErrc::DivisionByZero);
      CHECK(e.position() == 1);
    }
  }

  TEST_CASE("non-integer exponent") {
    try {
      evaluate(*parse_expression("4^0.5"));
      FAIL("expected NonIntegerExponent");
    } catch (const EvalError& e) {
      CHECK(e.code() == MathErrc::NonIntegerExponent);
    }
  }

  TEST_CASE("property: agrees with the independent big-rational oracle") {
    mmc::testing::ExprGenerator gen(20261016);
    int errors_seen = 0;
    for (int i = 0; i < 300; ++i) {
      auto tree = gen.generate(6);
      const std::string text = gen.render(*tree);
      const auto expected = mmc::testing::oracle_eval(*tree);
      CAPTURE(text);
      if (expected.value) {
        CHECK(value_of(text) == mmc::testing::oracle_to_fraction(*expected.value));
      } else {
        ++errors_seen;
        CHECK_THROWS_AS(value_of(text), EvalError);
      }
    }
    CHECK(errors_seen < 300);
  }
}

TEST_SUITE("round trip") {
  TEST_CASE("property: fully parenthesized printing reparses to the same tree") {
    mmc::testing::ExprGenerator gen(99);
    for (int i = 0; i < 300; ++i) {
      auto tree = gen.generate(6);
      auto parsed = parse_expression(gen.render(*tree));
      const std::string printed = to_string(*parsed);
      CAPTURE(printed);
      auto reparsed = parse_expression(printed);
      CHECK(*reparsed == *parsed);
      CHECK(to_string(*reparsed) == printed);
    }
  }
}

TEST_SUITE("chains") {
  TEST_CASE("parse_chain splits on top-level equals") {
    CHECK(parse_chain("18+2×3 = 18+6 = 24").exprs.size() == 3);
    CHECK(parse_chain("24").exprs.size() == 1);
  }

  TEST_CASE("empty sides") {
    try {
      parse_chain("= 24");
      FAIL("expected EmptySegment");
    } catch (const EmptySegment& e) {
      CHECK(e.position() == 0);
    }
    CHECK_THROWS_AS(parse_chain("24 ="), EmptySegment);
    CHECK_THROWS_AS(parse_chain("1 = = 1"), EmptySegment);
    CHECK_THROWS_AS(parse_chain("(1 = 1)"), ParseError);
  }

  TEST_CASE("check_chain") {
    CHECK(check_chain(parse_chain("18+2×3 = 18+6 = 24")).holds());
    CHECK(check_chain(parse_chain("5 = 5")).holds());
    CHECK(check_chain(parse_chain("24")).holds());

    auto r = check_chain(parse_chain("18+2×3 = 20×3 = 60"));
    REQUIRE(r.first_failure);
    CHECK(r.first_failure->equality_index == 1);
    CHECK(r.first_failure->lhs_value.to_string() == "24");
    CHECK(r.first_failure->rhs_value.to_string() == "60");

    auto late = check_chain(parse_chain("2+2 = 4 = 5"));
    REQUIRE(late.first_failure);
    CHECK(late.first_failure->equality_index == 2);
  }

  TEST_CASE("exactness: no floating point anywhere") {
    CHECK(check_chain(parse_chain("0.1+0.2 = 0.3")).holds());
    CHECK(check_chain(parse_chain("1/3 + 1/3 + 1/3 = 1")).holds());
  }

  TEST_CASE("evaluation errors name the expression") {
    try {
      check_chain(parse_chain("4 = 8/(2-2)"));
      FAIL("expected DivisionByZero");
    } catch (const EvalError& e) {
      CHECK(e.expression_index() == 1);
    }
  }

  TEST_CASE("property: permuting value-equal members still holds") {
    std::vector<std::string> members{"24", "18+6", "4*6", "48/2", "2^3*3", "0.5*48", "-(-24)"};
    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
      std::shuffle(members.begin(), members.end(), rng);
      std::string text;
      for (const auto& m : members) text += (text.empty() ? "" : " = ") + m;
      CHECK(check_chain(parse_chain(text)).holds());
    }
  }
}
