#pragma once

#include <functional>
#include <vector>

namespace kslab {

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

/// Compass (coordinate pattern) search. Polls +-step along each axis, moves
/// to the first improving point, halves the step after an unsuccessful
/// poll, and stops after `max_halvings` halvings or `max_evaluations`
/// function calls.
MinimizeResult pattern_search(const std::function<double(const std::vector<double>&)>& f,
                              std::vector<double> x0, double initial_step,
                              int max_halvings = 60, int max_evaluations = 200000);

/// Golden-section search for a unimodal function on [lo, hi].
MinimizeResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                              double tol = 1e-12, int max_iter = 200);

}  // namespace kslab
