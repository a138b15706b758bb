#pragma once

#include <stdexcept>
#include <string>

namespace crm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (s <= 0, u <= -1, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Two atoms share a location.
class PinpointingError : public Error {
  public:
    using Error::Error;
};

/// A numerical procedure produced a non-finite or unconverged value.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// The correction integral of the current density did not converge.
class CorrectionDivergenceError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// An atom lies outside the support set Y, where the density is undefined.
class SingularityError : public Error {
  public:
    using Error::Error;
};

/// The operation is not defined for this model (e.g. classifying a custom family).
class UnsupportedError : public Error {
  public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// The Levy measure has infinite mass where a finite one is required.
class InfiniteMassError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

/// Malformed configuration or an inconsistent combination of settings.
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace crm
