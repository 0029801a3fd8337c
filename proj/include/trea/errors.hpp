#pragma once

#include <stdexcept>
#include <string>

namespace trea {

// Base of every error raised by the library. Each subclass maps to one
// failure mode of the model; the CLI turns them into exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class AllZeroError : public Error {
 public:
  using Error::Error;
};

class AccumulatorOverflow : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ConvergenceDomainError : public Error {
 public:
  using Error::Error;
};

class InvalidSelect : public Error {
 public:
  using Error::Error;
};

class KernelTooSmall : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Malformed model/config file. what() names the offending field path.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace trea
