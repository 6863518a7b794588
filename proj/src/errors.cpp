#include "omcspin/errors.hpp"

#include <cmath>

namespace omcspin {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::FitFailure: return "fit-failure";
    case ErrorKind::Data: return "data";
    case ErrorKind::Extraction: return "extraction-failure";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

FitFailureError::FitFailureError(const std::string& what, double residual_norm)
    : Error(ErrorKind::FitFailure, what), residual_norm_(residual_norm) {}

static std::string with_line(const std::string& what, std::size_t line) {
  if (line == 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}

DataError::DataError(const std::string& what, std::size_t line)
    : Error(ErrorKind::Data, with_line(what, line)), line_(line) {}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InvalidInputError(std::string(what) + " must be finite");
}

}  // namespace omcspin
