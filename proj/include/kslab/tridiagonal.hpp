#pragma once

#include <span>

namespace kslab {

// Thomas elimination for sub/main/super diagonals a, b, c and right side d.
// a[0] and c[n-1] are ignored. d is overwritten with the solution; c is used
// as scratch. No pivoting, so the matrix should be diagonally dominant.
void thomas_solve(std::span<const double> a, std::span<const double> b, std::span<double> c,
                  std::span<double> d);

// Solves (I - r*D2) x = d in place, where D2 is the cell-centred second
// difference with mirror (zero-flux) closure at both ends. Column sums of
// the matrix are 1, so sum(x) == sum(d) up to rounding. `scratch` needs
// d.size() entries.
void solve_neumann_line(double r, std::span<double> d, std::span<double> scratch);

}  // namespace kslab
