#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zoblock {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Stepsize or probability choices that void the convergence guarantee of an algorithm.
class AdmissibilityError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class NonTerminationError : public Error {
 public:
  NonTerminationError(const std::string& what, double last_gap)
      : Error(what), last_gap_(last_gap) {}
  double last_gap() const { return last_gap_; }

 private:
  double last_gap_;
};

}  // namespace zoblock
