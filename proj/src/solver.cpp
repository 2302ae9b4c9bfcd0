#include "kslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "kslab/error.hpp"
#include "kslab/tridiagonal.hpp"

namespace kslab {

namespace {

constexpr double kClampReport = 1e-12;

// Calls fn(lo, hi) for every pair of neighbouring cells along `axis`,
// lo being the cell with the smaller coordinate.
template <class Fn>
void for_each_face(const Grid& grid, int axis, Fn&& fn) {
  const std::size_t stride = grid.stride(axis);
  const int n = grid.cells(axis);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const int i = static_cast<int>((idx / stride) % static_cast<std::size_t>(n));
    if (i + 1 < n) fn(idx, idx + stride);
  }
}

// Applies (I - r D2)^{-1} along every grid line parallel to `axis`.
void implicit_sweep(std::vector<double>& field, const Grid& grid, int axis, double r,
                    std::vector<double>& line, std::vector<double>& scratch) {
  const std::size_t stride = grid.stride(axis);
  const auto n = static_cast<std::size_t>(grid.cells(axis));
  line.resize(n);
  scratch.resize(n);
  for (std::size_t start = 0; start < grid.size(); ++start) {
    if ((start / stride) % n != 0) continue;
    for (std::size_t k = 0; k < n; ++k) line[k] = field[start + k * stride];
    solve_neumann_line(r, line, scratch);
    for (std::size_t k = 0; k < n; ++k) field[start + k * stride] = line[k];
  }
}

void implicit_diffusion(State& s, const Grid& grid, const Parameters& p, double dt) {
  std::vector<double> line, scratch;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const double h = grid.spacing(axis);
    implicit_sweep(s.u, grid, axis, dt * p.d1 / (h * h), line, scratch);
    implicit_sweep(s.v, grid, axis, dt * p.d2 / (h * h), line, scratch);
  }
}

void explicit_update(State& s, const Grid& grid, const Parameters& p, const SourceFunction* f,
                     bool with_diffusion, double dt, const Forcing& forcing) {
  const std::size_t n = grid.size();
  std::vector<double> du(n, 0.0), dv(n, 0.0);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const double h = grid.spacing(axis);
    for_each_face(grid, axis, [&](std::size_t lo, std::size_t hi) {
      const double w = p.chi * (s.v[hi] - s.v[lo]) / h;  // velocity from lo to hi
      const double flux = w * (w > 0.0 ? s.u[lo] : s.u[hi]);
      du[lo] -= flux / h;
      du[hi] += flux / h;
      if (with_diffusion) {
        const double fu = p.d1 * (s.u[hi] - s.u[lo]) / (h * h);
        const double fv = p.d2 * (s.v[hi] - s.v[lo]) / (h * h);
        du[lo] += fu;
        du[hi] -= fu;
        dv[lo] += fv;
        dv[hi] -= fv;
      }
    });
  }
  std::vector<double> gu, gv;
  if (forcing) {
    gu.assign(n, 0.0);
    gv.assign(n, 0.0);
    forcing(s.t, grid, gu, gv);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double ru = f ? (*f)(s.u[i]) : 0.0;
    double rv = -p.beta * s.v[i] + p.alpha * s.u[i];
    if (forcing) {
      ru += gu[i];
      rv += gv[i];
    }
    s.u[i] += dt * (du[i] + ru);
    s.v[i] += dt * (dv[i] + rv);
  }
}

std::size_t clamp(std::vector<double>& field) {
  std::size_t count = 0;
  for (double& x : field) {
    if (x < 0.0) {
      if (x < -kClampReport) ++count;
      x = 0.0;
    }
  }
  return count;
}

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double e : x) {
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(e));
  }
  return m;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::ImexAdi ? "imex-adi" : "fully-explicit"; }

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Completed: return "completed";
    case Outcome::BlowupDetected: return "blowup-detected";
    case Outcome::DtCollapse: return "dt-collapse";
  }
  return "unknown";
}

std::string to_string(IcKind k) {
  switch (k) {
    case IcKind::ConstantPlusPerturbation: return "constant-plus-perturbation";
    case IcKind::GaussianBump: return "gaussian-bump";
    case IcKind::CustomField: return "custom-field";
  }
  return "unknown";
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.dt_initial > 0.0)) throw InputError("dt_initial must be positive");
  if (!(cfg.dt_min > 0.0) || !(cfg.dt_min < cfg.dt_initial))
    throw InputError("dt_min must be positive and below dt_initial");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw InputError("t_end must be positive");
  if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0))
    throw InputError("cfl_safety must lie in (0, 1]");
  if (!(cfg.blowup_linf_threshold > 0.0))
    throw InputError("blowup_linf_threshold must be positive");
  if (cfg.snapshot_stride < 1) throw InputError("snapshot_stride must be at least 1");
}

State initial_condition(const InitialConditionSpec& spec, const Grid& grid) {
  State s;
  s.t = 0.0;
  const std::size_t n = grid.size();
  switch (spec.kind) {
    case IcKind::ConstantPlusPerturbation: {
      if (!(spec.amplitude >= 0.0)) throw InputError("perturbation amplitude must be nonnegative");
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> noise(-spec.amplitude, spec.amplitude);
      s.u.resize(n);
      for (double& x : s.u) x = spec.u_base + (spec.amplitude > 0.0 ? noise(rng) : 0.0);
      const double lowest = *std::min_element(s.u.begin(), s.u.end());
      if (lowest < 0.0)
        for (double& x : s.u) x -= lowest;
      s.v.assign(n, spec.v_base);
      break;
    }
    case IcKind::GaussianBump: {
      std::array<double, 3> c{};
      for (int a = 0; a < 3; ++a)
        c[a] = spec.center[a] < 0.0 ? 0.5 * grid.extent(a) : spec.center[a];
      if (!(spec.width > 0.0)) throw InputError("bump width must be positive");
      s.u.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = grid.center(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        s.u[i] = spec.u_base + spec.amplitude * std::exp(-r2 / (spec.width * spec.width));
      }
      s.v.assign(n, spec.v_base);
      break;
    }
    case IcKind::CustomField:
      s.u = spec.u_field;
      s.v = spec.v_field;
      break;
  }
  check_state(s, grid);
  return s;
}

double admissible_dt(const State& s, const Grid& grid, const Parameters& p,
                     const SourceFunction* f, const SolverConfig& cfg) {
  double transport = 0.0;
  if (p.chi != 0.0) {
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const double h = grid.spacing(axis);
      double gmax = 0.0;
      for_each_face(grid, axis, [&](std::size_t lo, std::size_t hi) {
        gmax = std::max(gmax, std::abs(s.v[hi] - s.v[lo]) / h);
      });
      transport += 2.0 * gmax / h;
    }
    transport *= std::abs(p.chi);
  }
  double reaction = p.beta;
  if (f) {
    for (double u : s.u) reaction = std::max(reaction, f->lipschitz(u));
  }
  double limit = std::numeric_limits<double>::infinity();
  if (transport > 0.0) limit = std::min(limit, 1.0 / transport);
  if (reaction > 0.0) limit = std::min(limit, 1.0 / reaction);
  if (cfg.scheme == Scheme::FullyExplicit) {
    const double h = grid.min_spacing();
    limit = std::min(limit, h * h / (2.0 * grid.dim() * std::max(p.d1, p.d2)));
  }
  return cfg.cfl_safety * limit;
}

StepResult step(const State& s, const Grid& grid, const Parameters& p, const SourceFunction* f,
                const SolverConfig& cfg, double dt, const Forcing& forcing) {
  if (!(dt > 0.0)) throw InputError("step size must be positive");
  StepResult r;
  r.dt = dt;
  r.state = s;
  State& next = r.state;
  if (cfg.scheme == Scheme::FullyExplicit) {
    explicit_update(next, grid, p, f, true, dt, forcing);
  } else if (cfg.strang) {
    implicit_diffusion(next, grid, p, 0.5 * dt);
    explicit_update(next, grid, p, f, false, dt, forcing);
    implicit_diffusion(next, grid, p, 0.5 * dt);
  } else {
    explicit_update(next, grid, p, f, false, dt, forcing);
    implicit_diffusion(next, grid, p, dt);
  }
  r.clamped = clamp(next.u) + clamp(next.v);
  next.t = s.t + dt;
  return r;
}

Trajectory run(const State& initial, const Grid& grid, const Parameters& p,
               const SourceFunction* f, const SolverConfig& cfg, const DiagnosticsRequest& req,
               const Forcing& forcing) {
  validate(cfg);
  check_state(initial, grid);
  Trajectory tr;
  State state = initial;
  const bool want_h = req.lyapunov && p.kappa > 0.0;

  auto record = [&](const State& st) {
    auto rec = sample(st, grid, p, req, tr.clamp_count);
    if (want_h && !rec.H) tr.diagnostics.vacuum_encountered = true;
    tr.diagnostics.records.push_back(std::move(rec));
    if (cfg.store_states && !tr.states.empty() && tr.states.back().t != st.t)
      tr.states.push_back(st);
  };

  tr.states.push_back(state);
  record(state);
  if (max_abs(state.u) > cfg.blowup_linf_threshold) {
    tr.outcome = Outcome::BlowupDetected;
    tr.message = "initial |u|_inf exceeds the blow-up threshold";
    return tr;
  }

  bool sampled_last = true;
  while (state.t < cfg.t_end) {
    const double remaining = cfg.t_end - state.t;
    const double dt = std::min({cfg.dt_initial, remaining, admissible_dt(state, grid, p, f, cfg)});
    if (dt < cfg.dt_min && dt < remaining) {
      tr.outcome = Outcome::DtCollapse;
      tr.message = "time step fell below dt_min at t=" + std::to_string(state.t);
      break;
    }
    auto r = step(state, grid, p, f, cfg, dt, forcing);
    state = std::move(r.state);
    if (dt == remaining) state.t = cfg.t_end;
    tr.clamp_count += r.clamped;
    ++tr.steps;
    if (max_abs(state.u) > cfg.blowup_linf_threshold) {
      tr.outcome = Outcome::BlowupDetected;
      tr.message = "|u|_inf exceeded the blow-up threshold at t=" + std::to_string(state.t);
      if (max_abs(state.u) < std::numeric_limits<double>::infinity() &&
          max_abs(state.v) < std::numeric_limits<double>::infinity())
        record(state);
      sampled_last = true;
      break;
    }
    sampled_last = tr.steps % static_cast<std::size_t>(cfg.snapshot_stride) == 0;
    if (sampled_last || state.t >= cfg.t_end) {
      record(state);
      sampled_last = true;
    }
  }
  if (!sampled_last) record(state);
  if (tr.states.back().t != state.t) tr.states.push_back(state);
  return tr;
}

ManufacturedProblem diffusion_manufactured(double d1) {
  ManufacturedProblem mp;
  mp.params = Parameters{};
  mp.params.d1 = d1;
  mp.params.d2 = 1.0;
  mp.params.chi = 0.0;
  mp.params.kappa = 0.0;
  constexpr double pi = std::numbers::pi;
  mp.u_exact = [](const std::array<double, 3>& x, double t) {
    return 2.0 + std::cos(pi * x[0]) * std::exp(-t);
  };
  mp.v_exact = mp.u_exact;
  const Parameters q = mp.params;
  mp.forcing = [q](double t, const Grid& grid, std::vector<double>& gu,
                       std::vector<double>& gv) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double ce = std::cos(pi * grid.center(i)[0]) * std::exp(-t);
      const double w = 2.0 + ce;
      gu[i] = -ce + q.d1 * pi * pi * ce;
      gv[i] = -ce + q.d2 * pi * pi * ce + q.beta * w - q.alpha * w;
    }
  };
  mp.logistic_source = false;
  return mp;
}

ManufacturedProblem chemotaxis_manufactured(const Parameters& params) {
  ManufacturedProblem mp;
  mp.params = validate(params);
  mp.logistic_source = true;
  constexpr double pi = std::numbers::pi;
  constexpr double amp = 0.5;
  mp.u_exact = [](const std::array<double, 3>& x, double t) {
    return 1.0 + amp * std::cos(pi * x[0]) * std::exp(-t);
  };
  mp.v_exact = mp.u_exact;
  const Parameters q = mp.params;
  mp.forcing = [q](double t, const Grid& grid, std::vector<double>& gu,
                       std::vector<double>& gv) {
    const double e = std::exp(-t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.center(i)[0];
      const double c = std::cos(pi * x), s = std::sin(pi * x);
      const double u = 1.0 + amp * c * e;
      const double ut = -amp * c * e;
      const double ux = -amp * pi * s * e;
      const double uxx = -amp * pi * pi * c * e;
      // v has the same profile
      const double f = q.kappa * u - q.mu * u * u;
      gu[i] = ut - q.d1 * uxx + q.chi * (ux * ux + u * uxx) - f;
      gv[i] = ut - q.d2 * uxx + q.beta * u - q.alpha * u;
    }
  };
  return mp;
}

RefinementResult refinement_study(const ManufacturedProblem& problem,
                                  const std::vector<Grid>& grids) {
  if (grids.size() < 3) throw InputError("refinement study needs at least 3 grids");
  for (std::size_t k = 1; k < grids.size(); ++k) {
    const Grid& a = grids[k - 1];
    const Grid& b = grids[k];
    if (a.dim() != b.dim() || a.extents() != b.extents())
      throw InputError("refinement grids must share dimension and extents");
    for (int axis = 0; axis < a.dim(); ++axis) {
      if (b.cells(axis) != 2 * a.cells(axis))
        throw InputError("refinement grids must be nested: each level doubles the cell count");
    }
  }

  std::optional<SourceFunction> source;
  if (problem.logistic_source)
    source = SourceFunction::standard_logistic(problem.params.kappa, problem.params.mu);

  RefinementResult out;
  for (const Grid& grid : grids) {
    State s0;
    s0.u.resize(grid.size());
    s0.v.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      s0.u[i] = problem.u_exact(grid.center(i), 0.0);
      s0.v[i] = problem.v_exact(grid.center(i), 0.0);
    }
    const double h = grid.min_spacing();
    SolverConfig cfg;
    cfg.dt_initial = problem.dt_factor * h * h;
    cfg.dt_min = 1e-6 * cfg.dt_initial;
    cfg.t_end = problem.t_end;
    cfg.cfl_safety = 1.0;
    cfg.snapshot_stride = 1 << 30;
    const auto tr = run(s0, grid, problem.params, source ? &*source : nullptr, cfg, {},
                        problem.forcing);
    if (tr.outcome != Outcome::Completed)
      throw std::runtime_error("manufactured run did not complete: " + tr.message);
    const State& end = tr.states.back();
    std::vector<double> err(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      err[i] = end.u[i] - problem.u_exact(grid.center(i), end.t);
    out.cells.push_back(grid.cells(0));
    out.errors.push_back(lp_norm(err, 2.0, grid));
  }
  for (std::size_t k = 1; k < out.errors.size(); ++k)
    out.orders.push_back(std::log2(out.errors[k - 1] / out.errors[k]));
  out.observed_order = out.orders.back();
  return out;
}

}  // namespace kslab
