#pragma once

#include <stdexcept>
#include <string>

namespace kslab {

/// Raised for inadmissible inputs: parameters, grids, configs, operation
/// preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a coefficient search finds no point satisfying an inequality
/// system at the requested damping rate.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double min_feasible_mu)
      : std::runtime_error(what), min_feasible_mu_(min_feasible_mu) {}

  double min_feasible_mu() const noexcept { return min_feasible_mu_; }

 private:
  double min_feasible_mu_;
};

}  // namespace kslab
