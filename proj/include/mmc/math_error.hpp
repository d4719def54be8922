#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mmc::math {

enum class MathErrc {
  Lex,
  Parse,
  EmptySegment,
  DivisionByZero,
  NonIntegerExponent,
  ExponentTooLarge,
};

const char* to_string(MathErrc code) noexcept;

// Base for every failure raised while reading or evaluating a step.
// `position()` is a character (code point) offset into the source text
// when one is known, for UI highlighting.
class MathError : public std::runtime_error {
 public:
  MathError(MathErrc code, std::string message, std::optional<std::size_t> position = std::nullopt);

  MathErrc code() const noexcept { return code_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  MathErrc code_;
  std::optional<std::size_t> position_;
};

class LexError : public MathError {
 public:
  LexError(std::size_t position, std::string offending);
  const std::string& offending() const noexcept { return offending_; }

 private:
  std::string offending_;
};

class ParseError : public MathError {
 public:
  ParseError(std::size_t position, std::string expected);
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::string expected_;
};

class EmptySegment : public MathError {
 public:
  explicit EmptySegment(std::size_t position);
};

// DivisionByZero, NonIntegerExponent, ExponentTooLarge. `expression_index`
// is filled in (0-based) when the failure happened inside an equality chain.
class EvalError : public MathError {
 public:
  EvalError(MathErrc code, std::string message, std::optional<std::size_t> position = std::nullopt);

  std::optional<std::size_t> expression_index() const noexcept { return expression_index_; }
  EvalError with_expression_index(std::size_t index) const;

 private:
  std::optional<std::size_t> expression_index_;
};

}  // namespace mmc::math
