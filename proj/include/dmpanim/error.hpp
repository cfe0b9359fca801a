#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dmpanim {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Parse = 2,
  Learn = 3,
  Validation = 4,
  Numeric = 5,
};

std::string_view to_string(ErrorKind kind);

/// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error(ErrorKind::Parse, message) {}
};

class LearnError : public Error {
 public:
  explicit LearnError(const std::string& message) : Error(ErrorKind::Learn, message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::Validation, message) {}
};

/// Raised when integration produces a non-finite state.
class NumericError : public Error {
 public:
  NumericError(const std::string& message, std::size_t step, std::size_t dim)
      : Error(ErrorKind::Numeric, message), step_(step), dim_(dim) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t step_;
  std::size_t dim_;
};

}  // namespace dmpanim
