#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relugd {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (t <= 0, eps not in (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition on the *state* of an argument is violated
// (asymmetric matrix, nonzero initial biases, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Dataset failed the nondegeneracy validator.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::pair<std::size_t, std::size_t>> pairs)
      : Error(what), pairs_(std::move(pairs)) {}

  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const noexcept { return pairs_; }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

// Training produced a non-finite or exploding risk.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step) : Error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace relugd
