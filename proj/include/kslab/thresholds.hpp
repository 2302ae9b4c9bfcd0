#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kslab/params.hpp"

namespace kslab {

/// Which closed form produced a damping threshold.
enum class Branch { ConvexEqualDiffusion, General };

std::string to_string(Branch b);

struct Threshold {
  double value = 0.0;
  Branch branch = Branch::General;
};

/// Global minimiser of the two-variable objective defining h(n, d1, d2).
struct HMinimum {
  double value = 0.0;
  double eps = 0.0;
  double eta = 0.0;
};

/// Weights of the z3 functional and the Young parameters that make its
/// differential inequality dissipative in three dimensions.
struct CoefficientSet3D {
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0, eps4 = 0.0;
  double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;
};

/// Same for the four-term functional z45 used when n = 4, 5.
struct CoefficientSet45D {
  double eps = 0.0, eta = 0.0;
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0, eps4 = 0.0;
  double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0, delta4 = 0.0;
};

/// One inequality of a coefficient system, evaluated as lhs = positive - negative.
struct InequalityCheck {
  std::string name;
  double margin = 0.0;
  double scale = 0.0;
  bool strict = true;
  bool passed = false;
};

struct SystemCheck {
  std::vector<InequalityCheck> inequalities;
  bool passed = false;

  /// Index of the first failing inequality, if any.
  std::optional<std::size_t> first_failure() const;
};

struct ThresholdReport {
  double mu0 = 0.0;
  Branch branch = Branch::General;
  double mu1 = 0.0;
  std::optional<double> gamma;
  std::optional<double> epsilon0;
  std::optional<double> h;  // set for n = 4, 5 on the general branch

  // applicability flags
  int n = 3;
  bool convex_assumed = false;
  bool convex_branch_eligible = false;  // d1 == d2 and chi > 0
  bool mu_exceeds_mu0 = false;
  bool mu_exceeds_mu1 = false;
  std::string gamma_note;
};

/// Objective minimised by h; +inf outside the open rectangle (0,d1)x(0,d2).
double h_objective(int n, double d1, double d2, double eps, double eta);

Threshold mu0_3d(const Parameters& p, bool convex);

/// h(n, d1, d2) for n in {4, 5}: 64x64 grid in logit coordinates, then a
/// compass search from the best cell.
HMinimum minimize_h(int n, double d1, double d2);

/// mu0 for n in {3, 4, 5}; any other n is rejected.
Threshold mu0_general(const Parameters& p, bool convex);

/// Convergence threshold: 0 for kappa <= 0, (alpha|chi|/4) sqrt(kappa/(d1 d2 beta)) otherwise.
double mu1(const Parameters& p);

struct GammaRate {
  double gamma = 0.0;
  double epsilon0 = 0.0;
};

/// Exponential rate and auxiliary epsilon0 of the kappa > 0 convergence
/// estimate. Requires kappa > 0, chi != 0 and mu > mu1.
GammaRate gamma_rate(const Parameters& p);

CoefficientSet3D select_coefficients_3d(const Parameters& p, double mu);

/// The textbook weights delta_i = bound + 1.
/// Kept for comparison; at mu close to mu0 these violate the fourth
/// inequality, which is why select_coefficients_3d scales the bounds instead.
CoefficientSet3D literal_delta_recipe_3d(const Parameters& p);

SystemCheck verify_system_3d(const Parameters& p, double mu, const CoefficientSet3D& c);

SystemCheck verify_system_45d(const Parameters& p, double mu, const CoefficientSet45D& c);

/// Throws InfeasibleError if no coefficient set with (eps, eta) = argmin h
/// satisfies the seven inequalities at this mu.
CoefficientSet45D select_coefficients_45d(const Parameters& p, double mu);

/// Smallest mu for which the n = 4, 5 system admits a coefficient set with
/// (eps, eta) = argmin h, found by pattern search over the free weights.
double min_feasible_mu_45d(const Parameters& p);

ThresholdReport report(const Parameters& p, bool convex);

/// Margin convention: strict passes need margin > 1e-12*scale, non-strict
/// ones margin >= -1e-12*scale.
inline constexpr double kMarginRelTol = 1e-12;

}  // namespace kslab
