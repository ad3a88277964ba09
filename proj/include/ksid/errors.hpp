// Exception hierarchy shared by all modules. The CLI maps these onto
// process exit codes: ConfigError -> 2, DataError -> 3, DivergenceError -> 4.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ksid {

// Malformed or inconsistent run configuration (bad key, missing file, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with ingested or constructed data: schema mismatches, NaN cells,
// non-uniform sampling, degenerate channels, insufficient samples.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatch between operands.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite entries where finite values are required.
class InvalidInputError : public DataError {
 public:
  using DataError::DataError;
};

// A state channel with zero variance cannot be z-score normalized.
class DegenerateChannelError : public DataError {
 public:
  using DataError::DataError;
};

// Numerical blow-up during a rollout or training run. Carries the step at
// which the first non-finite value appeared (or the simulated time).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_ = 0;
};

}  // namespace ksid
