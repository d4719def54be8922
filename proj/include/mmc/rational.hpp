#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace mmc::math {

// Exact rational number over arbitrary-precision integers. Always kept in
// lowest terms with a positive denominator; the sign lives on the numerator.
class Rational {
 public:
  Rational() = default;
  Rational(long long value);  // NOLINT(google-explicit-constructor)
  Rational(mpz_class numerator, mpz_class denominator);

  // Parses an unsigned decimal literal such as "12", "0.125" or ".5" exactly.
  static Rational from_decimal(std::string_view literal);

  const mpz_class& numerator() const noexcept { return num_; }
  const mpz_class& denominator() const noexcept { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  // Throws EvalError(DivisionByZero).
  friend Rational operator/(const Rational& a, const Rational& b);

  // Integer exponents only; a^(-k) = 1 / a^k. Throws EvalError for
  // non-integer exponents, 0^(-k), and exponents beyond kMaxExponent.
  Rational pow(const Rational& exponent) const;

  friend bool operator==(const Rational& a, const Rational& b);
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  // "n" for integers, "n/d" otherwise.
  std::string to_string() const;
  // Exact terminating decimal ("0.3", "-2.125") or nullopt when the
  // denominator has prime factors other than 2 and 5.
  std::optional<std::string> to_decimal_string() const;

  static constexpr long kMaxExponent = 4096;

 private:
  void normalize();

  mpz_class num_{0};
  mpz_class den_{1};
};

}  // namespace mmc::math
