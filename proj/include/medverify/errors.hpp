#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace medverify {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data or configuration. Carries every violation found, not just
/// the first one.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(message), violations_{message} {}
  ValidationError(const std::string& context, std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Unreadable source or unwritable sink.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A track without tokens cannot be turned into an indicator vector.
class InsufficientContent : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace medverify
