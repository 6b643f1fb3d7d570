#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace relqm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Point, offset or grid shape outside what an operator accepts.
class DomainError : public Error {
public:
  using Error::Error;
};

class SingularMetricError : public Error {
public:
  using Error::Error;
};

/// Invalid run or solver configuration (CFL violation, non-static input, ...).
class ConfigurationError : public Error {
public:
  using Error::Error;
};

class InstabilityError : public Error {
public:
  InstabilityError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// Integrand not normalizable on its carrier.
class IntegrationError : public Error {
public:
  using Error::Error;
};

/// Quadrature error estimate above the requested tolerance.
class AccuracyError : public Error {
public:
  using Error::Error;
};

class InconsistentDensityError : public Error {
public:
  using Error::Error;
};

class DegenerateFieldError : public Error {
public:
  using Error::Error;
};

class UnsupportedCarrierError : public Error {
public:
  using Error::Error;
};

class BoundaryConditionError : public Error {
public:
  using Error::Error;
};

/// Fixed-point iteration diverged; carries the residual trace seen so far.
class NonconvergenceError : public Error {
public:
  NonconvergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

private:
  std::vector<double> trace_;
};

}  // namespace relqm
