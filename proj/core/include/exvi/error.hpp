#pragma once

#include <stdexcept>
#include <string>

namespace exvi {

enum class ErrorKind {
  kValidation,
  kInsufficientData,
  kZeroVariance,
  kIllConditioned,
  kNumerical,
  kEmptyEvidence,
  kIo,
};

/// Base error for everything raised by the library. The kind decides the
/// CLI exit code: numerical problems map to 3, everything else to 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::kNumerical ||
           kind_ == ErrorKind::kIllConditioned;
  }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace exvi
