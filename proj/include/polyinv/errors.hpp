#pragma once

#include <stdexcept>
#include <string>

namespace polyinv {

/// Invalid argument or out-of-domain input.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Solver failed to reach a trustworthy answer (cycling guard, iteration cap).
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Hull update hit a configuration the tolerances cannot resolve.
class DegeneracyError : public NumericalFailure {
public:
  using NumericalFailure::NumericalFailure;
};

/// Malformed input file. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input whose contents violate a structural invariant.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace polyinv
