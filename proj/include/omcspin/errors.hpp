#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace omcspin {

enum class ErrorKind {
  InvalidInput,
  Domain,
  FitFailure,
  Data,
  Extraction,
  Io,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};

/// Inputs outside the region where a formula (or its inverse) is defined.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class FitFailureError : public Error {
 public:
  FitFailureError(const std::string& what, double residual_norm);
  double residual_norm() const noexcept { return residual_norm_; }

 private:
  double residual_norm_;
};

/// Schema or content problem in an input file. `line` is 1-based, 0 if unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ExtractionError : public Error {
 public:
  explicit ExtractionError(const std::string& what) : Error(ErrorKind::Extraction, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

// Throws InvalidInputError naming `what` unless x is finite.
void require_finite(double x, const char* what);

}  // namespace omcspin
