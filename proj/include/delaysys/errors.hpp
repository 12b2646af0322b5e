#pragma once

#include <stdexcept>
#include <string>

namespace delaysys {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation (negative time,
/// off-grid shift, p < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The Laplace variable coincides with a pole of the memory kernel.
class KernelPoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A linear system that must be solved is (numerically) singular.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A computation produced non-finite values or an iteration failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A system description failed validation. `field` names the offending
/// JSON path, e.g. "L.atoms[0].theta".
class SpecError : public Error {
 public:
  SpecError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace delaysys
