#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fload {

/// Malformed or ill-typed input: schema, corpus, contrast or model files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error at a known position. Line and column are 1-based; 0 means
/// unknown.
class ParseError : public InputError {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column = 0)
      : InputError(format(msg, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& msg, std::size_t line,
                            std::size_t column) {
    std::string where;
    if (line > 0) {
      where = "line " + std::to_string(line);
      if (column > 0) where += ", column " + std::to_string(column);
      where += ": ";
    }
    return where + msg;
  }

  std::size_t line_;
  std::size_t column_;
};

/// Inputs were well-formed but the requested quantity is undefined for them
/// (zero entropy denominators, constant correlation inputs, emptied strings).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fload
