#include "mmc/rational.hpp"

#include <algorithm>
#include <utility>

#include "mmc/math_error.hpp"

namespace mmc::math {

Rational::Rational(long long value) : num_(std::to_string(value)), den_(1) {}

Rational::Rational(mpz_class numerator, mpz_class denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_ == 0) {
    throw EvalError(MathErrc::DivisionByZero, "division by zero");
  }
  normalize();
}

Rational Rational::from_decimal(std::string_view literal) {
  std::string digits;
  digits.reserve(literal.size());
  std::size_t fraction_digits = 0;
  bool seen_point = false;
  for (char c : literal) {
    if (c == '.') {
      if (seen_point) throw std::invalid_argument("malformed decimal literal");
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("malformed decimal literal");
    digits.push_back(c);
    if (seen_point) ++fraction_digits;
  }
  if (digits.empty()) throw std::invalid_argument("malformed decimal literal");

  mpz_class num(digits, 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, fraction_digits);
  return Rational(std::move(num), std::move(den));
}

void Rational::normalize() {
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  if (num_ == 0) {
    den_ = 1;
    return;
  }
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), num_.get_mpz_t(), den_.get_mpz_t());
  if (g != 1) {
    mpz_divexact(num_.get_mpz_t(), num_.get_mpz_t(), g.get_mpz_t());
    mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
  }
}

Rational Rational::operator-() const {
  Rational r = *this;
  r.num_ = -r.num_;
  return r;
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) {
    throw EvalError(MathErrc::DivisionByZero, "division by zero");
  }
  return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

Rational Rational::pow(const Rational& exponent) const {
  if (!exponent.is_integer()) {
    throw EvalError(MathErrc::NonIntegerExponent,
                    "exponent " + exponent.to_string() + " is not an integer");
  }
  const bool negative = exponent.num_ < 0;
  mpz_class magnitude = abs(exponent.num_);

  // 0, 1 and -1 stay bounded under any exponent.
  if (num_ == 0) {
    if (negative) throw EvalError(MathErrc::DivisionByZero, "zero raised to a negative power");
    return magnitude == 0 ? Rational(1) : Rational(0);
  }
  if (den_ == 1 && abs(num_) == 1) {
    if (num_ == 1 || mpz_even_p(magnitude.get_mpz_t())) return Rational(1);
    return Rational(-1);
  }
  if (magnitude > kMaxExponent) {
    throw EvalError(MathErrc::ExponentTooLarge,
                    "exponent " + exponent.to_string() + " exceeds the supported magnitude");
  }

  const unsigned long k = magnitude.get_ui();
  mpz_class n;
  mpz_class d;
  mpz_pow_ui(n.get_mpz_t(), num_.get_mpz_t(), k);
  mpz_pow_ui(d.get_mpz_t(), den_.get_mpz_t(), k);
  if (negative) std::swap(n, d);
  return Rational(std::move(n), std::move(d));
}

bool operator==(const Rational& a, const Rational& b) {
  return a.num_ == b.num_ && a.den_ == b.den_;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const int c = cmp(a.num_ * b.den_, b.num_ * a.den_);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::to_string() const {
  if (den_ == 1) return num_.get_str();
  return num_.get_str() + "/" + den_.get_str();
}

std::optional<std::string> Rational::to_decimal_string() const {
  if (den_ == 1) return num_.get_str();

  mpz_class rest = den_;
  unsigned long twos = mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), mpz_class(2).get_mpz_t());
  unsigned long fives = mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), mpz_class(5).get_mpz_t());
  if (rest != 1) return std::nullopt;

  const unsigned long places = std::max(twos, fives);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
  mpz_class scaled = abs(num_) * (scale / den_);

  std::string digits = scaled.get_str();
  if (digits.size() <= places) digits.insert(0, places - digits.size() + 1, '0');
  digits.insert(digits.size() - places, ".");
  if (num_ < 0) digits.insert(0, "-");
  return digits;
}

}  // namespace mmc::math
