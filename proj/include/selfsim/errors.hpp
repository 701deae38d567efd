#pragma once

#include <stdexcept>
#include <string>

namespace selfsim {

//! Malformed or out-of-range input to an operation.
class InvalidInput : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! A request the implementation deliberately does not handle (e.g. a number
//! field outside Q and Q(sqrt q)).
class Unsupported : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! An enumeration or grid would exceed its configured budget.
class BudgetExceeded : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Precondition of a numerical check was not met.
class PreconditionFailed : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Parse error anchored to a line of the input text.
class ParseError : public std::runtime_error
{
public:
  ParseError(int line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ": " + msg)
    , line_(line)
  {}
  int line() const { return line_; }

private:
  int line_;
};

} // namespace selfsim
