#pragma once

#include <stdexcept>
#include <string>

namespace rcdcm {

// Base for every error raised by the engine. The CLI maps the subclasses
// onto exit codes (2 usage/config, 3 domain, 4 numerical).
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Malformed input: netlist syntax, table files, option values.
class ParseError : public Error
{
public:
  ParseError(const std::string& what, int line = 0)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line)
  {
  }
  int line() const { return line_; }

private:
  int line_;
};

// The request is well formed but outside what the data supports:
// a net larger than the characterized range, an unreachable voltage level.
class DomainError : public Error
{
public:
  using Error::Error;
};

// Singular systems, non-convergence, non-finite values.
class NumericalError : public Error
{
public:
  using Error::Error;
};

} // namespace rcdcm
