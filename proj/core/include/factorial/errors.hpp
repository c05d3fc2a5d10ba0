#ifndef FACTORIAL_ERRORS_HPP
#define FACTORIAL_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace factorial {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an estimator needs more replication than the data provides.
// Carries the offending arms as "z1z2...zK" strings.
class ReplicationError : public Error {
 public:
  ReplicationError(std::string what, std::vector<std::string> arms, int required)
      : Error(std::move(what)), arms_(std::move(arms)), required_(required) {}

  const std::vector<std::string>& arms() const { return arms_; }
  int required() const { return required_; }

 private:
  std::vector<std::string> arms_;
  int required_;
};

// Raised on malformed input files; line is 1-based (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(std::string what, std::size_t line)
      : Error(std::move(what)), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace factorial

#endif
