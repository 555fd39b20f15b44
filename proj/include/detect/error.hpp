#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace detect {

/// Caller handed an argument outside an operation's domain.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An objective cannot be evaluated for the number of time steps at hand.
class ObjectiveUndefined : public std::domain_error {
 public:
  explicit ObjectiveUndefined(const std::string& what)
      : std::domain_error("objective undefined: " + what) {}
};

/// Malformed or invalid input data. `line` is 1-based (0 when not tied to a
/// line) and `column` names the offending column, if any.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::size_t line = 0, std::string column = {})
      : std::runtime_error(format(message, line, column)), line_(line), column_(std::move(column)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line, const std::string& column) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!column.empty()) out += "column '" + column + "': ";
    return out + message;
  }

  std::size_t line_;
  std::string column_;
};

}  // namespace detect
