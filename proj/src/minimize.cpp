#include "kslab/minimize.hpp"

#include <algorithm>
#include <cmath>

namespace kslab {

MinimizeResult pattern_search(const std::function<double(const std::vector<double>&)>& f,
                              std::vector<double> x0, double initial_step, int max_halvings,
                              int max_evaluations) {
  MinimizeResult r;
  r.x = std::move(x0);
  r.value = f(r.x);
  r.evaluations = 1;
  double step = initial_step;
  int halvings = 0;
  std::vector<double> trial;
  while (halvings < max_halvings && r.evaluations < max_evaluations) {
    bool improved = false;
    for (std::size_t i = 0; i < r.x.size() && !improved; ++i) {
      for (double sign : {1.0, -1.0}) {
        trial = r.x;
        trial[i] += sign * step;
        const double value = f(trial);
        ++r.evaluations;
        if (value < r.value) {
          r.x = trial;
          r.value = value;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      ++halvings;
    }
  }
  return r;
}

MinimizeResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                              double tol, int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int evals = 2;
  for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  MinimizeResult r;
  const double x = fc < fd ? c : d;
  r.x = {x};
  r.value = std::min(fc, fd);
  r.evaluations = evals;
  return r;
}

}  // namespace kslab
