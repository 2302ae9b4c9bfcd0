#include "kslab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kslab/error.hpp"
#include "kslab/minimize.hpp"

namespace kslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(2n+4) - 2; equals sqrt(10) - 2 in three dimensions.
double root_term(int n) { return std::sqrt(2.0 * n + 4.0) - 2.0; }

double general_factor(int n, double d1, double d2) {
  return n / root_term(n) * (1.0 / d1 + 2.0 / d2);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

InequalityCheck make_check(std::string name, double positive, double negative, bool strict) {
  InequalityCheck c;
  c.name = std::move(name);
  c.margin = positive - negative;
  c.scale = std::abs(positive) + std::abs(negative);
  c.strict = strict;
  if (std::isnan(c.margin)) {
    c.passed = false;
  } else if (strict) {
    c.passed = c.margin > kMarginRelTol * c.scale;
  } else {
    c.passed = c.margin >= -kMarginRelTol * c.scale;
  }
  return c;
}

SystemCheck finish(std::vector<InequalityCheck> checks) {
  SystemCheck s;
  s.inequalities = std::move(checks);
  s.passed = std::all_of(s.inequalities.begin(), s.inequalities.end(),
                         [](const InequalityCheck& c) { return c.passed; });
  return s;
}

struct Eps3D {
  double eps1, eps2, eps3, eps4;
};

Eps3D optimal_eps_3d(const Parameters& p) {
  const double c = root_term(p.n);
  const double achi = std::abs(p.chi);
  return {p.d1 / 2.0, c * p.d2 / p.n, c * p.d2 * achi / (2.0 * p.n * p.alpha),
          c * (p.d1 + p.d2) * p.d2 * achi / (2.0 * p.n * p.d1 * p.alpha)};
}

// Lower bounds on delta1/delta2 and delta3/delta2 from inequalities 1 and 3.
struct Bounds3D {
  double delta1, delta3;
};

Bounds3D delta_bounds_3d(const Parameters& p, const Eps3D& e) {
  const double s = (p.d1 + p.d2) * (p.d1 + p.d2);
  return {s / (8.0 * e.eps4 * (p.d1 - e.eps1)), (e.eps3 + e.eps4) / (2.0 * (p.d2 - e.eps2))};
}

// --- four/five-dimensional coefficient search ------------------------------

struct Setup45D {
  Parameters p;
  HMinimum hmin;
  double s, a_gap, t_gap, pcoef, bcoef, eps1;
};

Setup45D setup_45d(const Parameters& p) {
  Setup45D st;
  st.p = p;
  st.hmin = minimize_h(p.n, p.d1, p.d2);
  const double a2 = p.alpha * p.alpha;
  st.s = (p.d1 + p.d2) * (p.d1 + p.d2);
  st.a_gap = p.d1 - st.hmin.eps;
  st.t_gap = p.d2 - st.hmin.eta;
  st.pcoef = 0.5 * a2 * (1.0 / st.hmin.eta + p.n / (2.0 * p.d2));
  st.bcoef = 2.0 * a2 / st.hmin.eta + p.n * a2 / (2.0 * p.d2);
  // minimiser of chi^2/(2 e1) + B e1/(d2 - eta)
  st.eps1 = std::abs(p.chi) * std::sqrt(st.t_gap / (2.0 * st.bcoef));
  return st;
}

constexpr double kDeltaInflation = 1.05;

// Free weights: eps3, eps4 and the slack rho >= 0 of delta3/delta2 over its
// lower bound from inequality 4.
CoefficientSet45D build_45d(const Setup45D& st, double mu, double eps3, double eps4, double rho) {
  const Parameters& p = st.p;
  CoefficientSet45D c;
  c.eps = st.hmin.eps;
  c.eta = st.hmin.eta;
  c.eps1 = st.eps1;
  c.eps3 = eps3;
  c.eps4 = eps4;
  c.delta2 = 1.0;
  const double lower3 = (2.0 * eps3 + st.s / (2.0 * eps4)) / (2.0 * st.t_gap);
  c.delta3 = lower3 * (1.0 + rho);
  // inequality 3 (and the ratio constraint) tight
  c.eps2 = st.s * c.delta3 / (4.0 * st.a_gap);
  c.delta4 = kDeltaInflation * (c.eps1 + c.eps2) * c.delta3 / (3.0 * st.t_gap);
  const double from_ineq1 = eps4 / (3.0 * st.a_gap);
  const double from_ineq5 = p.n * p.alpha * p.alpha / (54.0 * p.d2 * mu);
  c.delta1 = kDeltaInflation * std::max(from_ineq1, from_ineq5);
  return c;
}

// Largest left-side requirement on mu from inequalities 6 and 7.
double demanded_mu(const Setup45D& st, const CoefficientSet45D& c) {
  const Parameters& p = st.p;
  const double chi2 = p.chi * p.chi;
  const double m6 = (chi2 / (2.0 * c.eps3) + 1.5 * chi2 / c.eps * c.delta1 + st.pcoef * c.delta3) /
                    (2.0 * c.delta2);
  const double m7 = chi2 / (2.0 * c.eps1) + chi2 / (2.0 * c.eps) * c.delta2 / c.delta3 +
                    3.0 * st.bcoef * c.delta4 / c.delta3;
  return std::max(m6, m7);
}

// Smallest mu with demanded_mu(build(mu)) <= mu; demanded is nonincreasing in mu.
double required_mu(const Setup45D& st, double eps3, double eps4, double rho) {
  if (!(eps3 > 0.0) || !(eps4 > 0.0) || !(rho >= 0.0) || !std::isfinite(eps3) ||
      !std::isfinite(eps4) || !std::isfinite(rho))
    return kInf;
  auto gap = [&](double mu) { return demanded_mu(st, build_45d(st, mu, eps3, eps4, rho)) - mu; };
  double hi = demanded_mu(st, build_45d(st, kInf, eps3, eps4, rho));
  if (!std::isfinite(hi)) return kInf;
  if (gap(hi) <= 0.0) {
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (gap(mid) <= 0.0 ? hi : lo) = mid;
    }
  } else {
    while (gap(hi) > 0.0) hi *= 2.0;
  }
  return hi;
}

struct Search45D {
  double mu_req = kInf;
  double eps3 = 1.0, eps4 = 1.0, rho = 0.0;
};

// Construction that mirrors the hand recipe: eps3 = 1, delta3 at its lower
// bound, eps4 chosen by a one-dimensional search.
Search45D recipe_45d(const Setup45D& st) {
  auto obj = [&](double log_eps4) { return required_mu(st, 1.0, std::exp(log_eps4), 0.0); };
  const auto r = golden_section(obj, std::log(1e-8), std::log(1e8), 1e-12);
  Search45D out;
  out.eps3 = 1.0;
  out.eps4 = std::exp(r.x[0]);
  out.rho = 0.0;
  out.mu_req = r.value;
  return out;
}

Search45D global_45d(const Setup45D& st) {
  Search45D best = recipe_45d(st);
  auto obj = [&](const std::vector<double>& x) {
    return required_mu(st, std::exp(x[0]), std::exp(x[1]), std::exp(x[2]));
  };
  const double scale = std::log(std::abs(st.p.chi) * st.p.d2 / st.p.alpha);
  std::vector<std::vector<double>> starts = {
      {0.0, std::log(best.eps4), -12.0}};
  for (double o3 : {-3.0, 0.0, 3.0})
    for (double o4 : {-3.0, 0.0, 3.0})
      for (double r : {-6.0, 0.0}) starts.push_back({scale + o3, scale + o4, r});
  for (const auto& x0 : starts) {
    const auto r = pattern_search(obj, x0, 1.0, 50, 20000);
    if (r.value < best.mu_req) {
      best.mu_req = r.value;
      best.eps3 = std::exp(r.x[0]);
      best.eps4 = std::exp(r.x[1]);
      best.rho = std::exp(r.x[2]);
    }
  }
  return best;
}

void require_45d(const Parameters& p) {
  if (p.n != 4 && p.n != 5) throw InputError("this coefficient system requires n = 4 or 5");
  if (p.chi == 0.0) throw InputError("coefficient selection is degenerate at chi = 0");
}

}  // namespace

std::string to_string(Branch b) {
  return b == Branch::ConvexEqualDiffusion ? "convex-equal-diffusion" : "general";
}

std::optional<std::size_t> SystemCheck::first_failure() const {
  for (std::size_t i = 0; i < inequalities.size(); ++i)
    if (!inequalities[i].passed) return i;
  return std::nullopt;
}

double h_objective(int n, double d1, double d2, double eps, double eta) {
  if (!(eps > 0.0 && eps < d1 && eta > 0.0 && eta < d2)) return kInf;
  const double tail = n / (2.0 * d2);
  return std::sqrt(n / (18.0 * d2 * eps)) + std::sqrt((1.0 / eta + tail) / (2.0 * eps)) +
         std::sqrt((2.0 / eta + tail) / (d2 - eta)) *
             (std::sqrt(2.0) + (d1 + d2) / (2.0 * std::sqrt((d1 - eps) * (d2 - eta))));
}

Threshold mu0_3d(const Parameters& params, bool convex) {
  const Parameters p = validate(params);
  if (p.n != 3) throw InputError("mu0_3d requires n = 3");
  if (convex && p.d1 == p.d2 && p.chi > 0.0) {
    return {3.0 / (4.0 * p.d1) * p.alpha * p.chi, Branch::ConvexEqualDiffusion};
  }
  return {general_factor(3, p.d1, p.d2) * p.alpha * std::abs(p.chi), Branch::General};
}

HMinimum minimize_h(int n, double d1, double d2) {
  if (n != 4 && n != 5) throw InputError("h is defined here for n = 4 or 5 only");
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InputError("d1 and d2 must be positive");

  // logit coordinates keep every trial point strictly interior
  auto obj = [&](const std::vector<double>& x) {
    return h_objective(n, d1, d2, d1 * logistic(x[0]), d2 * logistic(x[1]));
  };
  constexpr int kCells = 64;
  constexpr double kSpan = 9.0;
  const double step = 2.0 * kSpan / (kCells - 1);
  std::vector<double> best{0.0, 0.0};
  double best_value = kInf;
  for (int i = 0; i < kCells; ++i) {
    for (int j = 0; j < kCells; ++j) {
      std::vector<double> x{-kSpan + i * step, -kSpan + j * step};
      const double v = obj(x);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    }
  }
  const auto r = pattern_search(obj, best, step, 60);
  return {r.value, d1 * logistic(r.x[0]), d2 * logistic(r.x[1])};
}

Threshold mu0_general(const Parameters& params, bool convex) {
  const Parameters p = validate(params);
  if (p.n == 3) return mu0_3d(p, convex);
  if (p.n != 4 && p.n != 5) {
    throw InputError("mu0 is available for n = 3, 4, 5 only; n >= 6 rests on an unproven "
                     "general-dimension conjecture and is out of scope");
  }
  if (convex && p.d1 == p.d2 && p.chi > 0.0) {
    return {p.n / (4.0 * p.d1) * p.alpha * p.chi, Branch::ConvexEqualDiffusion};
  }
  const double scale = p.alpha * std::abs(p.chi);
  if (scale == 0.0) return {0.0, Branch::General};
  const double h = minimize_h(p.n, p.d1, p.d2).value;
  return {std::max(h / 3.0, general_factor(p.n, p.d1, p.d2)) * scale, Branch::General};
}

double mu1(const Parameters& params) {
  const Parameters p = validate(params);
  if (p.kappa <= 0.0) return 0.0;
  return p.alpha * std::abs(p.chi) / 4.0 * std::sqrt(p.kappa / (p.d1 * p.d2 * p.beta));
}

GammaRate gamma_rate(const Parameters& params) {
  const Parameters p = validate(params);
  if (p.kappa <= 0.0) throw InputError("gamma_rate requires kappa > 0");
  if (p.chi == 0.0) throw InputError("gamma_rate is degenerate at chi = 0");
  if (!(p.mu > mu1(p))) throw InputError("gamma_rate requires mu > mu1");
  const double chi2 = p.chi * p.chi;
  const double dd = p.d1 * p.d2;
  const double eps0 =
      0.5 * (p.alpha / (4.0 * p.beta) + 4.0 * dd * p.mu * p.mu / (p.alpha * p.kappa * chi2));
  const double weight = p.kappa * chi2 / (4.0 * dd * p.mu);
  const double first = p.mu - p.alpha * weight * eps0;
  const double second = weight * (p.beta - p.alpha / (4.0 * eps0));
  const double denom = (p.n + 2) * std::max(p.mu / p.kappa, p.kappa * chi2 / (8.0 * dd * p.mu));
  return {std::min(first, second) / denom, eps0};
}

CoefficientSet3D literal_delta_recipe_3d(const Parameters& params) {
  const Parameters p = validate(params);
  if (p.chi == 0.0) throw InputError("coefficient selection is degenerate at chi = 0");
  const Eps3D e = optimal_eps_3d(p);
  const Bounds3D b = delta_bounds_3d(p, e);
  const double second = p.alpha * p.alpha / (16.0 * p.d2) * root_term(p.n) /
                        ((1.0 / p.d1 + 2.0 / p.d2) * p.alpha * std::abs(p.chi));
  CoefficientSet3D c{e.eps1, e.eps2, e.eps3, e.eps4, 0.0, 1.0, 0.0};
  c.delta1 = std::max(b.delta1, second) + 1.0;
  c.delta3 = b.delta3 + 1.0;
  return c;
}

CoefficientSet3D select_coefficients_3d(const Parameters& params, double mu) {
  Parameters p = validate(params);
  if (p.n != 3) throw InputError("select_coefficients_3d requires n = 3");
  if (p.chi == 0.0) throw InputError("coefficient selection is degenerate at chi = 0");
  p.mu = mu;
  const double mu0 = mu0_3d(p, false).value;
  if (!(mu > mu0)) throw InputError("mu must exceed mu0");

  const Eps3D e = optimal_eps_3d(p);
  const Bounds3D b = delta_bounds_3d(p, e);
  const double chi2 = p.chi * p.chi;
  const double a2 = p.alpha * p.alpha;
  const double from3 = 2.0 * (p.n / (2.0 * p.d2) + 1.0 / e.eps2) * a2 * b.delta3;
  const double from1 = chi2 / (2.0 * e.eps1) * b.delta1;
  const double base = chi2 / (4.0 * e.eps3) + from3 + from1;  // equals mu0 up to rounding
  if (!(mu > base)) throw InputError("mu must exceed mu0");
  // spend half the slack mu - mu0 on inflating the two binding ratios
  const double theta = std::min(1.0, (mu - base) / (2.0 * (from3 + from1)));

  CoefficientSet3D c;
  c.eps1 = e.eps1;
  c.eps2 = e.eps2;
  c.eps3 = e.eps3;
  c.eps4 = e.eps4;
  c.delta2 = 1.0;
  c.delta1 = (1.0 + theta) * std::max(b.delta1, p.n * a2 / (16.0 * p.d2 * mu));
  c.delta3 = (1.0 + theta) * b.delta3;
  return c;
}

SystemCheck verify_system_3d(const Parameters& p, double mu, const CoefficientSet3D& c) {
  const double s = (p.d1 + p.d2) * (p.d1 + p.d2);
  const double chi2 = p.chi * p.chi;
  const double a2 = p.alpha * p.alpha;
  std::vector<InequalityCheck> checks;
  checks.push_back(make_check("grad-u", 2.0 * (p.d1 - c.eps1) * c.delta1,
                              s / (4.0 * c.eps4) * c.delta2, true));
  checks.push_back(
      make_check("u-cubed", 2.0 * mu * c.delta1, p.n * a2 / (8.0 * p.d2) * c.delta2, true));
  checks.push_back(make_check("grad-gradv-squared", 2.0 * (p.d2 - c.eps2) * c.delta3,
                              (c.eps3 + c.eps4) * c.delta2, true));
  checks.push_back(make_check("u-squared-gradv-squared", mu * c.delta2,
                              chi2 / (4.0 * c.eps3) * c.delta2 +
                                  2.0 * (p.n / (2.0 * p.d2) + 1.0 / c.eps2) * a2 * c.delta3 +
                                  chi2 / (2.0 * c.eps1) * c.delta1,
                              false));
  return finish(std::move(checks));
}

SystemCheck verify_system_45d(const Parameters& p, double mu, const CoefficientSet45D& c) {
  const double s = (p.d1 + p.d2) * (p.d1 + p.d2);
  const double chi2 = p.chi * p.chi;
  const double a2 = p.alpha * p.alpha;
  const double tail = p.n / (2.0 * p.d2);
  std::vector<InequalityCheck> checks;
  checks.push_back(make_check("u-grad-u", 6.0 * (p.d1 - c.eps) * c.delta1,
                              2.0 * c.eps4 * c.delta2, true));
  checks.push_back(make_check("gradv-grad-gradv", 6.0 * (p.d2 - c.eta) * c.delta4,
                              2.0 * (c.eps1 + c.eps2) * c.delta3, true));
  checks.push_back(make_check("grad-u-gradv", 2.0 * (p.d1 - c.eps) * c.delta2,
                              s / (2.0 * c.eps2) * c.delta3, false));
  checks.push_back(make_check("u-grad-gradv", 2.0 * (p.d2 - c.eta) * c.delta3,
                              (2.0 * c.eps3 + s / (2.0 * c.eps4)) * c.delta2, false));
  checks.push_back(
      make_check("u-fourth", 3.0 * mu * c.delta1, p.n * a2 / (18.0 * p.d2) * c.delta2, false));
  checks.push_back(make_check("u-cubed-gradv-squared", 2.0 * mu * c.delta2,
                              chi2 / (2.0 * c.eps3) * c.delta2 + 1.5 * chi2 / c.eps * c.delta1 +
                                  0.5 * a2 * (1.0 / c.eta + tail) * c.delta3,
                              false));
  checks.push_back(make_check("u-squared-gradv-fourth", mu * c.delta3,
                              chi2 / (2.0 * c.eps1) * c.delta3 + chi2 / (2.0 * c.eps) * c.delta2 +
                                  3.0 * (2.0 * a2 / c.eta + p.n * a2 / (2.0 * p.d2)) * c.delta4,
                              false));
  checks.push_back(make_check("delta-ratio", 2.0 * (p.d2 - c.eta) / (2.0 * c.eps3 + s / (2.0 * c.eps4)),
                              s / (4.0 * c.eps2 * (p.d1 - c.eps)), false));
  return finish(std::move(checks));
}

CoefficientSet45D select_coefficients_45d(const Parameters& params, double mu) {
  Parameters p = validate(params);
  require_45d(p);
  p.mu = mu;
  const double mu0 = mu0_general(p, false).value;
  if (!(mu > mu0)) throw InputError("mu must exceed mu0");

  const Setup45D st = setup_45d(p);
  const Search45D recipe = recipe_45d(st);
  if (recipe.mu_req <= mu) {
    auto c = build_45d(st, mu, recipe.eps3, recipe.eps4, recipe.rho);
    if (verify_system_45d(p, mu, c).passed) return c;
  }
  const Search45D best = global_45d(st);
  if (best.mu_req <= mu) {
    auto c = build_45d(st, mu, best.eps3, best.eps4, best.rho);
    if (verify_system_45d(p, mu, c).passed) return c;
  }
  std::ostringstream msg;
  msg << "no coefficient set satisfies the n=" << p.n << " system at mu=" << mu
      << " (mu0=" << mu0 << ", smallest feasible mu found=" << best.mu_req << ")";
  throw InfeasibleError(msg.str(), best.mu_req);
}

double min_feasible_mu_45d(const Parameters& params) {
  const Parameters p = validate(params);
  require_45d(p);
  return global_45d(setup_45d(p)).mu_req;
}

ThresholdReport report(const Parameters& params, bool convex) {
  const Parameters p = validate(params);
  ThresholdReport r;
  const Threshold t = mu0_general(p, convex);
  r.mu0 = t.value;
  r.branch = t.branch;
  r.n = p.n;
  r.convex_assumed = convex;
  r.convex_branch_eligible = p.d1 == p.d2 && p.chi > 0.0;
  if (p.n >= 4 && t.branch == Branch::General) r.h = minimize_h(p.n, p.d1, p.d2).value;
  r.mu1 = mu1(p);
  r.mu_exceeds_mu0 = p.mu > r.mu0;
  r.mu_exceeds_mu1 = p.mu > r.mu1;
  if (p.kappa <= 0.0) {
    r.gamma_note = "kappa <= 0: exponential rate gamma not applicable";
  } else if (p.chi == 0.0) {
    r.gamma_note = "chi = 0: gamma degenerate";
  } else if (!r.mu_exceeds_mu1) {
    r.gamma_note = "mu <= mu1: gamma undefined";
  } else {
    const GammaRate g = gamma_rate(p);
    r.gamma = g.gamma;
    r.epsilon0 = g.epsilon0;
  }
  return r;
}

}  // namespace kslab
