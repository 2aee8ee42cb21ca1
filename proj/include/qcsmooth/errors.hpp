#pragma once

#include <stdexcept>
#include <string>

namespace qcsmooth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live in incompatible hybrid spaces (block count or block size).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

/// Malformed model description (negative rate, label out of range, ...).
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// The observed jump superoperator annihilates the state: no detection is possible.
class NullJump : public Error {
 public:
  using Error::Error;
};

/// The no-detection survival probability fell below the renormalization floor.
class Extinct : public Error {
 public:
  using Error::Error;
};

/// Every classical label has zero weight given the future record.
class InfeasibleFuture : public Error {
 public:
  using Error::Error;
};

/// A smoothed weight is attached to a classical label the filtered state rules out.
class InconsistentWeight : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcsmooth
