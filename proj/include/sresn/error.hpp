#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sresn {

// Base for every failure raised by the library. The CLI maps subclasses to
// exit codes, so keep the hierarchy shallow.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, malformed config, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Request outside the domain of available data (grid past the trajectory,
// probe step past the run length, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed (SVD non-convergence, QR breakdown, zero norm).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A state became non-finite or left the divergence guard.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::size_t step, std::size_t index)
      : NumericalError(what), step_(step), index_(index) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t step_;
  std::size_t index_;
};

// Cholesky met a non-positive pivot.
class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, std::size_t pivot)
      : NumericalError(what), pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sresn
