#pragma once

#include <stdexcept>
#include <string>

namespace slsh {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector dimensions are zero or do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A deterministic guarantee was requested for inputs it does not cover.
class ContractInapplicable : public Error {
 public:
  using Error::Error;
};

/// Approximation factor at or below the family threshold.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// The index would exceed the configured entry cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or corrupted serialized data.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace slsh
