#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chenfliess {

// Argument outside the mathematical domain of an operation (time outside
// [0,T], mismatched dimensions, s > t, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A functional was asked for a derivative it does not provide, or a
// derivative word outside its declared smoothness class.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Malformed configuration; carries the 1-based line number when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace chenfliess
