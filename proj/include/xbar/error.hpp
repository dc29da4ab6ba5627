#pragma once

#include <stdexcept>
#include <string>

namespace xbar {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: violated precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unknown magic, version or dtype in a tensor file.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Payload shorter or longer than its header announces.
class LengthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// More weights than a crossbar can hold.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Bit width outside the supported range.
class UnsupportedWidthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Filesystem failures (missing, unreadable or unwritable files).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace xbar
