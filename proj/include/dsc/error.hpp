#pragma once

#include <stdexcept>
#include <string>

namespace dsc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A design target cannot be reached for the given parameters.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The network is at or below the epidemic threshold (R0 <= 1).
class SubcriticalError : public Error {
 public:
  using Error::Error;
};

/// Input sits on a pole or singular point of a formula.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Not enough data points for the requested statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class NonStationaryError : public Error {
 public:
  using Error::Error;
};

/// Explicit time step violates the diffusion stability bound.
class StabilityError : public Error {
 public:
  using Error::Error;
};

class NoFrontError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsc
