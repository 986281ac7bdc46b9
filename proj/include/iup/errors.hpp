#pragma once

#include <stdexcept>
#include <string>

namespace iup {

// Base of every error thrown by the toolkit. The CLI maps any of these to a
// single-line diagnostic and a nonzero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidOptions : public Error {
 public:
  using Error::Error;
};

// Fewer than three samples per fringe period, or a fringe frequency at or
// above half the frame count.
class NyquistViolation : public Error {
 public:
  using Error::Error;
};

class EstimationFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Wavelength or temperature outside a dispersion set's validity window.
class RangeError : public Error {
 public:
  using Error::Error;
};

class NoPhaseMatching : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public IoError {
 public:
  using IoError::IoError;
};

class IntegrityError : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedVersion : public IoError {
 public:
  using IoError::IoError;
};

class OverflowError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace iup
