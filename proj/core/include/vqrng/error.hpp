#pragma once

#include <stdexcept>
#include <string>

namespace vqrng {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configuration field violates its invariant. `field()` carries the
/// dotted config key (e.g. "modulator.m") so front ends can name it.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The arm-balance condition has no solution for the given detection setup.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// LO-on variance below LO-off variance, or traces too short to calibrate.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Bit or block lengths do not match what an operation requires.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// The leftover-hash bound leaves no room for any output bits.
class InsufficientEntropyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vqrng
