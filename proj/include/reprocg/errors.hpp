#pragma once

#include <stdexcept>
#include <string>

namespace reprocg {

// Non-finite operand handed to an exact kernel.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class overflow_error : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Result left the range in which the operation is exact (e.g. the error
// term of a product that underflows below the subnormal threshold).
class range_error : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Caller broke an API contract: mismatched sizes, bad topology, etc.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data violates a structural precondition (matrix not s.p.d.-shaped).
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Numerical breakdown of an iterative method, e.g. <d, A d> <= 0 in CG.
class breakdown_error : public std::runtime_error {
 public:
  breakdown_error(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace reprocg
