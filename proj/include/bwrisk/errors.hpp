#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bwrisk {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed user input; carries one message per offending field.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> items);
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
};

// A numerical procedure failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double partial = 0.0)
      : std::runtime_error(what), partial_(partial) {}
  double partial_estimate() const { return partial_; }

 private:
  double partial_;
};

// The constrained problem has no feasible contract.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double best_value)
      : std::runtime_error(what), best_value_(best_value) {}
  double best_value() const { return best_value_; }

 private:
  double best_value_;
};

// Parameters fall outside the regime a closed form covers.
class UnsupportedRegime : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace bwrisk
