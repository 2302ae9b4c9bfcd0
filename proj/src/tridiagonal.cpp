#include "kslab/tridiagonal.hpp"

#include "kslab/error.hpp"

namespace kslab {

void thomas_solve(std::span<const double> a, std::span<const double> b, std::span<double> c,
                  std::span<double> d) {
  const std::size_t n = d.size();
  if (a.size() != n || b.size() != n || c.size() != n) {
    throw InputError("thomas_solve: diagonal lengths differ");
  }
  if (n == 0) return;
  c[0] /= b[0];
  d[0] /= b[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = 1.0 / (b[i] - a[i] * c[i - 1]);
    if (i + 1 < n) c[i] *= m;
    d[i] = (d[i] - a[i] * d[i - 1]) * m;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
}

void solve_neumann_line(double r, std::span<double> d, std::span<double> scratch) {
  const std::size_t n = d.size();
  if (n < 2) return;
  // constant coefficients, so the forward sweep only needs the modified
  // super-diagonal, stored in scratch
  double denom = 1.0 + r;
  scratch[0] = -r / denom;
  d[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    const double diag = (i + 1 < n) ? 1.0 + 2.0 * r : 1.0 + r;
    denom = diag + r * scratch[i - 1];
    scratch[i] = -r / denom;
    d[i] = (d[i] + r * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= scratch[i] * d[i + 1];
}

}  // namespace kslab
