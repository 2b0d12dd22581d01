#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid physical or numerical parameter (non-unitary coupling, negative occupation, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The Fock cutoff (or thermal-spectrum truncation) discards more weight than allowed.
class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& what, double tail = 0.0)
      : Error(what), tail_mass_(tail) {}
  double tail_mass() const noexcept { return tail_mass_; }

 private:
  double tail_mass_;
};

/// A matrix claimed to be a density matrix is not one (negative eigenvalues, not Hermitian).
class StateValidityError : public Error {
 public:
  using Error::Error;
};

/// The closed-form environment normal form is singular (no untrusted noise).
class DegenerateScenarioError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration; carries the offending line and field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : Error(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace cvqkd
