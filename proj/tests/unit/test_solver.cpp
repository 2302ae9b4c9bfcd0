#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kslab/error.hpp"
#include "kslab/solver.hpp"
#include "kslab/thresholds.hpp"

using namespace kslab;

namespace {

Parameters unit_params(int n) {
  Parameters p;
  p.d1 = p.d2 = p.chi = p.alpha = p.beta = p.kappa = 1.0;
  p.mu = 8.0;
  p.n = n;
  return p;
}

double total(const std::vector<double>& u, const Grid& g) {
  return std::accumulate(u.begin(), u.end(), 0.0) * g.cell_volume();
}

State bump_state(const Grid& g, double amplitude, double width, double base = 0.5) {
  InitialConditionSpec ic;
  ic.kind = IcKind::GaussianBump;
  ic.u_base = base;
  ic.v_base = base;
  ic.amplitude = amplitude;
  ic.width = width;
  return initial_condition(ic, g);
}

}  // namespace

TEST_CASE("initial conditions") {
  const Grid g = Grid::unit_box(3, 15);  // odd count puts a cell centre at the midpoint
  State s = bump_state(g, 5.0, 0.1, 1.0);
  CHECK(*std::max_element(s.u.begin(), s.u.end()) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(*std::min_element(s.u.begin(), s.u.end()) >= 1.0);

  InitialConditionSpec flat;
  flat.kind = IcKind::ConstantPlusPerturbation;
  flat.u_base = 2.0;
  flat.v_base = 3.0;
  flat.amplitude = 0.0;
  const State c = initial_condition(flat, g);
  CHECK(std::all_of(c.u.begin(), c.u.end(), [](double x) { return x == 2.0; }));
  CHECK(std::all_of(c.v.begin(), c.v.end(), [](double x) { return x == 3.0; }));
  CHECK(c.t == 0.0);

  flat.amplitude = 0.1;
  flat.seed = 42;
  const State a = initial_condition(flat, g), b = initial_condition(flat, g);
  CHECK(a.u == b.u);
  flat.seed = 43;
  CHECK(initial_condition(flat, g).u != a.u);
  for (double x : a.u) CHECK(std::abs(x - 2.0) <= 0.1);

  flat.u_base = 0.01;
  flat.amplitude = 1.0;
  const State shifted = initial_condition(flat, g);
  CHECK(*std::min_element(shifted.u.begin(), shifted.u.end()) >= 0.0);

  InitialConditionSpec custom;
  custom.kind = IcKind::CustomField;
  custom.u_field.assign(g.size(), 1.0);
  custom.v_field.assign(g.size(), 1.0);
  CHECK_NOTHROW(initial_condition(custom, g));
  custom.u_field[7] = -1.0;
  CHECK_THROWS_AS(initial_condition(custom, g), InputError);
  custom.u_field.pop_back();
  CHECK_THROWS_AS(initial_condition(custom, g), InputError);
}

TEST_CASE("solver configuration validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.dt_min = cfg.dt_initial;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg = {};
  cfg.cfl_safety = 1.5;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg = {};
  cfg.snapshot_stride = 0;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg = {};
  cfg.t_end = 0.0;
  CHECK_THROWS_AS(validate(cfg), InputError);
}

TEST_CASE("homogeneous equilibrium is preserved to 1e-12 per step") {
  for (int dim : {1, 2, 3}) {
    const Parameters p = unit_params(3);
    const Grid g = Grid::unit_box(dim, dim == 3 ? 8 : 16);
    const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
    const double us = p.kappa / p.mu, vs = p.alpha * us / p.beta;
    State s{std::vector<double>(g.size(), us), std::vector<double>(g.size(), vs), 0.0};
    for (bool strang : {false, true}) {
      SolverConfig cfg;
      cfg.strang = strang;
      State cur = s;
      for (int k = 0; k < 20; ++k) {
        const auto r = step(cur, g, p, &f, cfg, 0.01);
        for (std::size_t i = 0; i < g.size(); ++i) {
          CHECK(std::abs(r.state.u[i] - us) <= 1e-12 * us);
          CHECK(std::abs(r.state.v[i] - vs) <= 1e-12 * vs);
        }
        cur = r.state;
      }
    }
  }
}

TEST_CASE("mass is conserved per step without reactions") {
  for (int dim : {1, 2, 3}) {
    const Grid g = Grid::unit_box(dim, dim == 3 ? 12 : 32);
    for (double chi : {0.0, 3.0}) {
      Parameters p = unit_params(3);
      p.chi = chi;
      State s = bump_state(g, 4.0, 0.2);
      SolverConfig cfg;
      for (int k = 0; k < 10; ++k) {
        const double dt = std::min(0.01, admissible_dt(s, g, p, nullptr, cfg));
        const auto r = step(s, g, p, nullptr, cfg, dt);
        CHECK(std::abs(total(r.state.u, g) - total(s.u, g)) <= 1e-12 * total(s.u, g));
        CHECK(r.clamped == 0);
        s = r.state;
      }
    }
  }
}

TEST_CASE("kappa = 0 with uniform data follows u' = -mu u^2") {
  Parameters p = unit_params(1);
  p.kappa = 0.0;
  p.mu = 1.0;
  p.chi = 0.0;
  const Grid g = Grid::unit_box(1, 16);
  const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
  State s{std::vector<double>(g.size(), 1.0), std::vector<double>(g.size(), 1.0), 0.0};
  SolverConfig cfg;
  cfg.dt_initial = 1e-3;
  cfg.t_end = 10.0;
  cfg.snapshot_stride = 100;
  const Trajectory tr = run(s, g, p, &f, cfg);
  CHECK(tr.outcome == Outcome::Completed);
  CHECK(tr.states.back().t == doctest::Approx(10.0));
  CHECK(std::abs(tr.diagnostics.records.back().mass_u - 1.0 / 11.0) < 1e-4);
  for (const auto& rec : tr.diagnostics.records)
    CHECK(rec.mass_u == doctest::Approx(1.0 / (1.0 + rec.t)).epsilon(2e-3));
}

TEST_CASE("admissible dt is nonincreasing in |chi| and includes the diffusion limit when explicit") {
  const Grid g = Grid::unit_box(2, 24);
  State s = bump_state(g, 3.0, 0.15);
  s.v = s.u;
  Parameters p = unit_params(3);
  const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
  SolverConfig cfg;
  double prev = INFINITY;
  for (double chi : {0.0, 0.5, 1.0, 2.0, 8.0, 32.0}) {
    p.chi = chi;
    const double dt = admissible_dt(s, g, p, &f, cfg);
    CHECK(dt <= prev);
    p.chi = -chi;
    CHECK(admissible_dt(s, g, p, &f, cfg) == dt);
    prev = dt;
  }
  p.chi = 0.0;
  cfg.scheme = Scheme::FullyExplicit;
  const double h = g.min_spacing();
  CHECK(admissible_dt(s, g, p, &f, cfg) <= cfg.cfl_safety * h * h / (2.0 * 2 * 1.0) + 1e-15);
}

TEST_CASE("upwinding keeps densities nonnegative on random states") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid g = Grid::unit_box(2, 20);
  for (int trial = 0; trial < 10; ++trial) {
    State s{std::vector<double>(g.size()), std::vector<double>(g.size()), 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      s.u[i] = u(rng) < 0.3 ? 0.0 : 5.0 * u(rng);
      s.v[i] = 10.0 * u(rng);
    }
    Parameters p = unit_params(2);
    p.chi = 4.0;
    const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
    SolverConfig cfg;
    for (int k = 0; k < 5; ++k) {
      const double dt = std::min(0.01, admissible_dt(s, g, p, &f, cfg));
      const auto r = step(s, g, p, &f, cfg, dt);
      CHECK(r.clamped == 0);
      CHECK(*std::min_element(r.state.u.begin(), r.state.u.end()) >= 0.0);
      s = r.state;
    }
  }
}

TEST_CASE("explicit scheme commutes with translation away from the walls") {
  const Grid g = Grid::unit_box(1, 64);
  auto make = [&](int centre) {
    State s{std::vector<double>(g.size(), 1.0), std::vector<double>(g.size(), 1.0), 0.0};
    for (int k = -3; k <= 3; ++k) {
      s.u[centre + k] += 2.0 * std::exp(-0.3 * k * k);
      s.v[centre + k] += 1.0 * std::exp(-0.5 * k * k);
    }
    return s;
  };
  Parameters p = unit_params(1);
  p.chi = 2.0;
  const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
  SolverConfig cfg;
  cfg.scheme = Scheme::FullyExplicit;
  State a = make(20), b = make(28);
  const double dt = 0.5 * std::min(admissible_dt(a, g, p, &f, cfg), admissible_dt(b, g, p, &f, cfg));
  for (int k = 0; k < 8; ++k) {
    a = step(a, g, p, &f, cfg, dt).state;
    b = step(b, g, p, &f, cfg, dt).state;
  }
  for (int i = 4; i < 52; ++i) {
    CHECK(b.u[i + 8] == doctest::Approx(a.u[i]).epsilon(1e-13));
    CHECK(b.v[i + 8] == doctest::Approx(a.v[i]).epsilon(1e-13));
  }
}

TEST_CASE("run: completion, sampling and stored states") {
  const Grid g = Grid::unit_box(1, 32);
  Parameters p = unit_params(1);
  p.chi = 5.0;
  const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
  SolverConfig cfg;
  cfg.t_end = 0.5;
  cfg.snapshot_stride = 3;
  cfg.store_states = true;
  const Trajectory tr = run(bump_state(g, 2.0, 0.1), g, p, &f, cfg);
  CHECK(tr.outcome == Outcome::Completed);
  CHECK(tr.clamp_count == 0);
  const auto t = tr.diagnostics.times();
  CHECK(t.front() == 0.0);
  CHECK(t.back() == doctest::Approx(0.5).epsilon(1e-12));
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] > t[k - 1]);
  CHECK(tr.states.size() == t.size());
  CHECK(tr.steps >= 50);
}

TEST_CASE("run: blow-up detector and dt collapse") {
  const Grid g = Grid::unit_box(2, 16);
  Parameters p = unit_params(2);
  const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
  SolverConfig cfg;
  cfg.blowup_linf_threshold = 1.0;
  const Trajectory blown = run(bump_state(g, 5.0, 0.2), g, p, &f, cfg);
  CHECK(blown.outcome == Outcome::BlowupDetected);
  CHECK(blown.steps == 0);
  CHECK_FALSE(blown.message.empty());

  cfg = {};
  cfg.dt_min = 1e-4;
  p.chi = 1e9;
  State s = bump_state(g, 1.0, 0.2);
  s.v = s.u;
  const Trajectory collapsed = run(s, g, p, &f, cfg);
  CHECK(collapsed.outcome == Outcome::DtCollapse);
  CHECK(collapsed.states.back().t < cfg.t_end);

  cfg = {};
  cfg.t_end = 0.0;
  CHECK_THROWS_AS(run(s, g, p, &f, cfg), InputError);
  p.chi = 1.0;
  State bad = s;
  bad.u.pop_back();
  CHECK_THROWS_AS(run(bad, g, unit_params(2), &f, SolverConfig{}), InputError);
}

TEST_CASE("diffusion manufactured solution converges at second order") {
  const auto prob = diffusion_manufactured(1.0);
  std::vector<Grid> grids;
  for (int c : {16, 32, 64}) grids.push_back(Grid::unit_box(1, c));
  const RefinementResult r = refinement_study(prob, grids);
  REQUIRE(r.errors.size() == 3);
  CHECK(r.errors[1] < r.errors[0]);
  CHECK(r.errors[2] < r.errors[1]);
  CHECK(r.observed_order == doctest::Approx(2.0).epsilon(0.1));

  std::vector<Grid> two{grids[0], grids[1]};
  CHECK_THROWS_AS(refinement_study(prob, two), InputError);
  std::vector<Grid> repeated{grids[0], grids[0], grids[1]};
  CHECK_THROWS_AS(refinement_study(prob, repeated), InputError);
}

TEST_CASE("chemotaxis manufactured solution converges at first order or better") {
  Parameters p = unit_params(1);
  p.chi = 0.5;
  const auto prob = chemotaxis_manufactured(p);
  std::vector<Grid> grids;
  for (int c : {16, 32, 64, 128}) grids.push_back(Grid::unit_box(1, c));
  const RefinementResult r = refinement_study(prob, grids);
  CHECK(r.observed_order >= 0.8);
  CHECK(r.observed_order <= 2.0);
}
