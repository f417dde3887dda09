#pragma once

#include <stdexcept>
#include <string>

namespace gnslab {

/// Rejected input: parameter domain violations, malformed files, shape and
/// precondition failures. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed serialized data (GFN payloads, model files, CSV). Validation
/// subclass so it shares the CLI exit code for rejected input.
class FormatError : public ValidationError {
 public:
  explicit FormatError(const std::string& what) : ValidationError(what) {}
};

/// A computation that started from valid input failed to produce a usable
/// result (domain too small, degenerate norms, non-finite intermediates).
/// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gnslab
