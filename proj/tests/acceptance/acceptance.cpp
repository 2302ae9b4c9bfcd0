// Acceptance checks 1-7. Prints one PASS/FAIL line per criterion (details on
// indented lines) and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/h_oracle.hpp"
#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/scenario.hpp"
#include "kslab/solver.hpp"
#include "kslab/sweep.hpp"
#include "kslab/thresholds.hpp"

using namespace kslab;

namespace {

struct Verdict {
  bool passed = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    passed = passed && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Parameters unit_params(int n) {
  Parameters p;
  p.d1 = p.d2 = p.chi = p.alpha = p.beta = p.kappa = 1.0;
  p.mu = 8.0;
  p.n = n;
  return p;
}

// ---------------------------------------------------------------- 1
Verdict criterion1() {
  Verdict v;
  const Parameters p = unit_params(3);
  const double general = mu0_3d(p, false).value;
  const double convex = mu0_3d(p, true).value;
  const double m1 = mu1(p);
  v.require(std::abs(general - 7.743416) <= 1e-6, fmt("mu0_3d nonconvex = %.12f", general));
  v.require(convex == 0.75, fmt("mu0_3d convex = %.17g", convex));
  v.require(m1 == 0.25, fmt("mu1 = %.17g", m1));
  return v;
}

// ---------------------------------------------------------------- 2
Verdict criterion2() {
  Verdict v;
  double worst = 0.0;
  for (int n : {4, 5}) {
    for (double d1 : {0.1, 1.0, 10.0}) {
      for (double d2 : {0.1, 1.0, 10.0}) {
        const auto ref = kslab_test::h_brute_force(n, d1, d2);
        const HMinimum got = minimize_h(n, d1, d2);
        const double rel = std::abs(got.value - ref.value) / ref.value;
        worst = std::max(worst, rel);
        const bool interior = got.eps > 0.0 && got.eps < d1 && got.eta > 0.0 && got.eta < d2;
        double frozen = 0.0;
        for (const auto& row : kslab_test::kFrozenH)
          if (row.n == n && row.d1 == d1 && row.d2 == d2) frozen = row.h;
        const double rel_frozen = std::abs(got.value - frozen) / frozen;
        v.require(rel <= 1e-5 && rel_frozen <= 1e-5 && interior,
                  fmt("h(%d,%g,%g) = %.12g  oracle %.12g  rel %.1e  argmin (%.6g, %.6g)", n, d1,
                      d2, got.value, ref.value, rel, got.eps, got.eta));
      }
    }
  }
  v.note(fmt("worst relative deviation %.2e", worst));
  return v;
}

// ---------------------------------------------------------------- 3
Verdict criterion3() {
  Verdict v;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.1, 10.0), factor(1.001, 10.0), coin(0.0, 1.0);
  auto draw = [&](int n) {
    Parameters p = unit_params(n);
    p.d1 = u(rng);
    p.d2 = u(rng);
    p.alpha = u(rng);
    p.chi = u(rng) * (coin(rng) < 0.5 ? -1.0 : 1.0);
    return p;
  };

  int pass3 = 0, below_fail = 0;
  for (int i = 0; i < 100; ++i) {
    const Parameters p = draw(3);
    const double mu0 = mu0_3d(p, false).value;
    const double f = i == 0 ? 1.001 : i == 1 ? 10.0 : factor(rng);
    try {
      if (verify_system_3d(p, f * mu0, select_coefficients_3d(p, f * mu0)).passed) ++pass3;
    } catch (const std::exception&) {
    }
    const CoefficientSet3D c = select_coefficients_3d(p, 1.001 * mu0);
    if (!verify_system_3d(p, 0.99 * mu0, c).inequalities[3].passed) ++below_fail;
  }
  v.require(pass3 == 100, fmt("3D: %d/100 draws pass verify_system_3d at mu in [1.001, 10] mu0", pass3));
  v.require(below_fail == 100,
            fmt("3D: fourth inequality fails at 0.99 mu0 in %d/100 draws", below_fail));

  for (int n : {4, 5}) {
    int pass = 0;
    std::vector<std::string> misses;
    for (int i = 0; i < 20; ++i) {
      const Parameters p = draw(n);
      const double mu0 = mu0_general(p, false).value;
      const double f = i == 0 ? 1.001 : i == 1 ? 10.0 : factor(rng);
      try {
        const auto c = select_coefficients_45d(p, f * mu0);
        if (verify_system_45d(p, f * mu0, c).passed) ++pass;
        else misses.push_back(fmt("factor %.3f: verify failed", f));
      } catch (const InfeasibleError& e) {
        misses.push_back(fmt("factor %.3f: infeasible, smallest feasible mu found = %.3f mu0", f,
                             e.min_feasible_mu() / mu0));
      }
    }
    v.require(pass == 20, fmt("%dD: %d/20 draws pass verify_system_45d at mu in [1.001, 10] mu0", n, pass));
    for (const auto& m : misses) v.note(m);
  }
  return v;
}

// ---------------------------------------------------------------- 4 and 5(i)
struct BoundednessRun {
  Parameters p;
  Trajectory tr;
  double u0_mass = 0.0;
  SourceCertificate cert;
  double seconds = 0.0;
};

BoundednessRun boundedness_run() {
  BoundednessRun r;
  r.p = unit_params(3);
  r.p.mu = 1.2 * mu0_3d(r.p, false).value;
  const Grid g = Grid::unit_box(3, 32);
  InitialConditionSpec ic;
  ic.kind = IcKind::GaussianBump;
  ic.u_base = r.p.kappa / r.p.mu;
  ic.v_base = r.p.alpha * ic.u_base / r.p.beta;
  ic.amplitude = 5.0;
  ic.width = 0.1;
  const State s0 = initial_condition(ic, g);
  SolverConfig cfg;
  cfg.dt_initial = 0.01;
  cfg.t_end = 20.0;
  cfg.snapshot_stride = 1;
  DiagnosticsRequest req;
  req.z3 = select_coefficients_3d(r.p, r.p.mu);
  req.lyapunov = true;
  const auto f = SourceFunction::standard_logistic(r.p.kappa, r.p.mu);
  r.cert = f.certificate();
  r.u0_mass = lp_norm(s0.u, 1.0, g) * g.measure();
  const auto t0 = std::chrono::steady_clock::now();
  r.tr = run(s0, g, r.p, &f, cfg, req);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Verdict criterion4(const BoundednessRun& r) {
  Verdict v;
  const auto& d = r.tr.diagnostics;
  v.note(fmt("3D 32^3, mu = %.6f, %zu steps in %.1f s", r.p.mu, r.tr.steps, r.seconds));
  v.require(r.tr.outcome == Outcome::Completed, "outcome " + to_string(r.tr.outcome));
  v.require(r.tr.clamp_count == 0, fmt("clamp counter %zu", r.tr.clamp_count));
  const double early = max_z_in(d, 0.0, 6.0), late = max_z_in(d, 14.0, 20.0);
  v.require(late <= 1.05 * early, fmt("max z3 on [14,20] = %.6g, on [0,6] = %.6g", late, early));
  const auto mass = mass_bound_check(d, r.cert, r.u0_mass, 1.0);
  v.require(mass.passed, fmt("mass bound %.6g, worst margin %.6g", mass.bound, mass.worst_margin));
  return v;
}

Verdict criterion5(const BoundednessRun& r) {
  Verdict v;
  // (i)
  {
    const GammaRate g = gamma_rate(r.p);
    const auto& d = r.tr.diagnostics;
    try {
      const DecayFit fit = fit_decay(d.times(), d.column("eq_deviation"), std::pair{10.0, 20.0});
      const double rate = -fit.exponential.slope;
      v.require(rate >= g.gamma,
                fmt("(i) exp rate of eq deviation on [10,20] = %.6g >= gamma = %.6g", rate, g.gamma));
    } catch (const InputError& e) {
      v.require(false, std::string("(i) fit failed: ") + e.what());
    }
    v.require(!d.vacuum_encountered && h_nonincreasing(d, 1e-8),
              fmt("(i) H nonincreasing within 1e-8 H(0) per step, H(0) = %.6g, H(end) = %.6g",
                  *d.records.front().H, *d.records.back().H));
  }
  // (ii) kappa = 0, uniform data in 1D
  {
    Parameters p = unit_params(1);
    p.kappa = 0.0;
    p.mu = 1.0;
    const Grid g = Grid::unit_box(1, 32);
    const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
    State s{std::vector<double>(g.size(), 1.0), std::vector<double>(g.size(), 1.0), 0.0};
    SolverConfig cfg;
    cfg.dt_initial = 1e-3;
    cfg.t_end = 10.0;
    cfg.snapshot_stride = 10;
    const Trajectory tr = run(s, g, p, &f, cfg);
    const double mass = tr.diagnostics.records.back().mass_u;
    v.require(tr.outcome == Outcome::Completed && std::abs(mass - 1.0 / 11.0) <= 1e-4,
              fmt("(ii) int u(10) = %.8f vs 1/11 = %.8f", mass, 1.0 / 11.0));
    const DecayFit fit = fit_decay(tr.diagnostics.times(), tr.diagnostics.column("Linf_u"));
    const double expo = -fit.algebraic.slope;
    v.require(expo >= 1.0 / (p.n + 1.0),
              fmt("(ii) algebraic exponent of |u|_inf = %.6g >= 1/(n+1) = %.3g", expo, 1.0 / (p.n + 1.0)));
  }
  // (iii) kappa = -1, chi = 0
  {
    Parameters p = unit_params(1);
    p.kappa = -1.0;
    p.chi = 0.0;
    const Grid g = Grid::unit_box(1, 32);
    const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
    InitialConditionSpec ic;
    ic.kind = IcKind::ConstantPlusPerturbation;
    ic.u_base = 1.0;
    ic.v_base = 1.0;
    ic.amplitude = 0.5;
    ic.seed = 3;
    SolverConfig cfg;
    cfg.dt_initial = 1e-2;
    cfg.t_end = 10.0;
    const Trajectory tr = run(initial_condition(ic, g), g, p, &f, cfg);
    const DecayFit fit = fit_decay(tr.diagnostics.times(), tr.diagnostics.column("Linf_u"));
    const double rate = -fit.exponential.slope;
    v.require(tr.outcome == Outcome::Completed && rate >= -p.kappa / (p.n + 1.0),
              fmt("(iii) exp rate of |u|_inf = %.6g >= -kappa/(n+1) = %.3g", rate,
                  -p.kappa / (p.n + 1.0)));
  }
  return v;
}

// ---------------------------------------------------------------- 6
Verdict criterion6() {
  Verdict v;
  std::vector<Grid> grids;
  for (int c : {16, 32, 64, 128}) grids.push_back(Grid::unit_box(1, c));
  const RefinementResult r = refinement_study(diffusion_manufactured(1.0), grids);
  v.require(std::abs(r.observed_order - 2.0) <= 0.2,
            fmt("diffusion manufactured order %.4f (errors %.3e %.3e %.3e %.3e)", r.observed_order,
                r.errors[0], r.errors[1], r.errors[2], r.errors[3]));

  {
    const Grid g = Grid::unit_box(2, 48);
    Parameters p = unit_params(3);
    p.chi = 0.0;
    InitialConditionSpec ic;
    ic.u_base = 0.5;
    ic.amplitude = 4.0;
    ic.width = 0.15;
    State s = initial_condition(ic, g);
    SolverConfig cfg;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double before = lp_norm(s.u, 1.0, g);
      s = step(s, g, p, nullptr, cfg, 0.01).state;
      worst = std::max(worst, std::abs(lp_norm(s.u, 1.0, g) - before) / before);
    }
    v.require(worst <= 1e-12, fmt("mass drift per step, f = 0, chi = 0: %.2e", worst));
  }
  {
    const Grid g = Grid::unit_box(3, 16);
    const Parameters p = unit_params(3);
    const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
    const double us = p.kappa / p.mu, vs = p.alpha * us / p.beta;
    State s{std::vector<double>(g.size(), us), std::vector<double>(g.size(), vs), 0.0};
    SolverConfig cfg;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const State next = step(s, g, p, &f, cfg, 0.01).state;
      for (std::size_t i = 0; i < g.size(); ++i) {
        worst = std::max(worst, std::abs(next.u[i] - s.u[i]) / us);
        worst = std::max(worst, std::abs(next.v[i] - s.v[i]) / vs);
      }
      s = next;
    }
    v.require(worst <= 1e-12, fmt("equilibrium drift per step: %.2e", worst));
  }
  return v;
}

// ---------------------------------------------------------------- 7
Verdict criterion7() {
  Verdict v;
  ExperimentConfig cfg;
  cfg.params = unit_params(3);
  cfg.params.chi = 5.0;
  cfg.params.mu = 0.5;  // weak damping so aggregation can lift the peak above its initial value
  cfg.grid = Grid::unit_box(2, 128);
  cfg.solver.dt_initial = 0.01;
  cfg.solver.t_end = 2.0;
  cfg.ic.kind = IcKind::GaussianBump;
  cfg.ic.u_base = cfg.params.kappa / cfg.params.mu;
  cfg.ic.v_base = cfg.ic.u_base;
  cfg.ic.amplitude = 1.0;
  cfg.ic.width = 0.2;
  cfg.write_snapshots = false;
  cfg.output_dir = (std::filesystem::temp_directory_path() / "kslab_acceptance_sweep").string();
  std::filesystem::remove_all(cfg.output_dir);

  SweepSpec spec;
  spec.axis = "d1";
  spec.values = {1.0, 0.5, 0.25, 0.125};
  spec.base = cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_sweep(spec);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool monotone = true;
  std::string trail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    trail += fmt("%s d1=%g: %.6g (%s)", i ? "," : "", rows[i].value, rows[i].sup_linf_u,
                 rows[i].outcome.c_str());
    if (rows[i].outcome == "config-error") monotone = false;
    if (i > 0 && rows[i].sup_linf_u < rows[i - 1].sup_linf_u) monotone = false;
  }
  const double initial_peak = cfg.ic.u_base + cfg.ic.amplitude;
  v.note(fmt("2D 128^2, chi = 5, mu = 0.5, t_end = 2, initial peak %.4g, %.1f s", initial_peak, secs));
  v.require(monotone, "sup |u|_inf nondecreasing as d1 decreases:" + trail);
  v.note(rows.back().sup_linf_u > 1.5 * initial_peak
             ? "smallest d1 aggregates well above the initial peak"
             : "no run rose clearly above the initial peak");
  return v;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    std::function<Verdict()> fn;
  };
  BoundednessRun shared;
  bool shared_ready = false;
  auto bounded = [&]() -> const BoundednessRun& {
    if (!shared_ready) {
      shared = boundedness_run();
      shared_ready = true;
    }
    return shared;
  };
  const std::vector<Entry> entries = {
      {1, "threshold values", criterion1},
      {2, "h minimisation vs brute-force oracle", criterion2},
      {3, "coefficient-system verification", criterion3},
      {4, "boundedness at desk scale", [&] { return criterion4(bounded()); }},
      {5, "convergence audits", [&] { return criterion5(bounded()); }},
      {6, "discretisation validation", criterion6},
      {7, "small-diffusion trend", criterion7},
  };
  int failed = 0;
  for (const auto& e : entries) {
    Verdict v;
    try {
      v = e.fn();
    } catch (const std::exception& ex) {
      v.require(false, std::string("exception: ") + ex.what());
    }
    std::printf("CRITERION %d %s: %s\n", e.id, v.passed ? "PASS" : "FAIL", e.title);
    for (const auto& d : v.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!v.passed) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(entries.size()) - failed, entries.size());
  return failed == 0 ? 0 : 1;
}
