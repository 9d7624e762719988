#pragma once

#include <stdexcept>
#include <string>

namespace artigen {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered, degenerate geometry, or a diverging training run.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Caller supplied an argument outside an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A graph or file failed a structural check.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace artigen
