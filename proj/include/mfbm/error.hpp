#pragma once

#include <stdexcept>
#include <string>

namespace mfbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration (bad model parameters, out-of-range lag, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quadrature or factorization did not reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved = 0.0)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class SimulationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Request exceeds a resource guard (e.g. N too large for a dense factorization).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// The spectrum cannot be formed from the data at some scale.
class AnalysisError : public Error {
 public:
  AnalysisError(const std::string& what, double frequency = 0.0)
      : Error(what), frequency_(frequency) {}
  double frequency() const noexcept { return frequency_; }

 private:
  double frequency_;
};

/// The path carries no variance (constant or zero); log-spectrum undefined.
class DegeneratePathError : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

/// No admissible segmentation exists for the requested number of changes.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfbm
