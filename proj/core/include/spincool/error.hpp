#pragma once

#include <stdexcept>
#include <string>

namespace spincool {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (negative occupancy,
/// zero amplitude in a ratio, unknown basis, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
  public:
    using Error::Error;
};

class UnsupportedBasisError : public Error {
  public:
    using Error::Error;
};

/// A state whose trace vanished where a normalized observable was requested.
class DegenerateStateError : public Error {
  public:
    using Error::Error;
};

/// A displacement too large to be represented faithfully in the requested
/// Fock truncation.
class AmplitudeTooLargeError : public Error {
  public:
    AmplitudeTooLargeError(const std::string &what, int required_dim)
        : Error(what), required_dim_(required_dim) {}
    int required_dim() const noexcept { return required_dim_; }

  private:
    int required_dim_;
};

/// Postselection whose success probability fell below the numerical floor.
/// `iteration` is 0 when the failure happened outside an iterated protocol.
class VanishingBranchError : public Error {
  public:
    VanishingBranchError(const std::string &what, double probability, int iteration = 0)
        : Error(what), probability_(probability), iteration_(iteration) {}
    double probability() const noexcept { return probability_; }
    int iteration() const noexcept { return iteration_; }

  private:
    double probability_;
    int iteration_;
};

/// A fixed-step integrator or iterative search that did not reach its
/// tolerance. `residual` is the achieved error estimate.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string &what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// Open-system integration produced a state with a clearly negative eigenvalue.
class PositivityError : public Error {
  public:
    PositivityError(const std::string &what, double min_eigenvalue)
        : Error(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

  private:
    double min_eigenvalue_;
};

} // namespace spincool
