#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace robcov {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative s, z >= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// phi^{-1}(y) requested for y outside (0, phi_inf).
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be positive definite failed to factorize.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The sample columns do not span the ambient space.
class SpanError : public Error {
 public:
  using Error::Error;
};

/// An iteration hit its budget; carries the last residual.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Repeated eigenvalues producing a zero denominator in the G-MUSIC weights.
class DegenerateSpectrumError : public Error {
 public:
  DegenerateSpectrumError(const std::string& what, std::size_t i, std::size_t k)
      : Error(what), i_(i), k_(k) {}

  std::size_t first_index() const noexcept { return i_; }
  std::size_t second_index() const noexcept { return k_; }

 private:
  std::size_t i_;
  std::size_t k_;
};

/// The population covariance of a DOA scenario lacks an (N-K)-dimensional noise eigenspace.
class DegenerateScenarioError : public Error {
 public:
  using Error::Error;
};

/// Fewer local minima than requested sources in a pseudo-spectrum.
class DetectionFailureError : public Error {
 public:
  using Error::Error;
};

/// Entry distribution violating the finite (8+eta)-th moment requirement.
class MomentConditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace robcov
