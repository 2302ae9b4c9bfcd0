#include "kslab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "kslab/error.hpp"
#include "kslab/io.hpp"
#include "kslab/sweep.hpp"
#include "kslab/thresholds.hpp"

namespace kslab {

namespace {

using Report = std::vector<std::pair<std::string, std::string>>;

const char* yes_no(bool b) { return b ? "true" : "false"; }

void put(Report& r, std::string key, std::string value) {
  r.emplace_back(std::move(key), std::move(value));
}

void put(Report& r, std::string key, double value) { put(r, std::move(key), format_double(value)); }

}  // namespace

std::vector<std::pair<std::string, std::string>> describe(const ThresholdReport& t) {
  Report rep;
  put(rep, "mu0", t.mu0);
  put(rep, "mu0_branch", to_string(t.branch));
  if (t.h) put(rep, "h", *t.h);
  put(rep, "mu1", t.mu1);
  if (t.gamma) {
    put(rep, "gamma", *t.gamma);
    put(rep, "epsilon0", *t.epsilon0);
  } else {
    put(rep, "gamma", "absent (" + t.gamma_note + ")");
  }
  put(rep, "n", std::to_string(t.n));
  put(rep, "convex_assumed", yes_no(t.convex_assumed));
  put(rep, "convex_branch_eligible", yes_no(t.convex_branch_eligible));
  put(rep, "mu_exceeds_mu0", yes_no(t.mu_exceeds_mu0));
  put(rep, "mu_exceeds_mu1", yes_no(t.mu_exceeds_mu1));
  return rep;
}

namespace {

// z functional weights, when the coefficient system is solvable at this mu.
DiagnosticsRequest build_request(const Parameters& p, Report& rep) {
  DiagnosticsRequest req;
  req.lyapunov = p.kappa > 0.0;
  if (p.chi == 0.0) {
    put(rep, "z", "not monitored (chi = 0)");
    return req;
  }
  if (!(p.mu > mu0_general(p, false).value)) {
    put(rep, "z", "not monitored (mu <= mu0 of the general branch)");
    return req;
  }
  if (p.n == 3) {
    const auto c = select_coefficients_3d(p, p.mu);
    req.z3 = c;
    put(rep, "z3.eps", format_double(c.eps1) + " " + format_double(c.eps2) + " " +
                           format_double(c.eps3) + " " + format_double(c.eps4));
    put(rep, "z3.delta", format_double(c.delta1) + " " + format_double(c.delta2) + " " +
                             format_double(c.delta3));
  } else {
    try {
      const auto c = select_coefficients_45d(p, p.mu);
      req.z45 = c;
      put(rep, "z45.eps_eta", format_double(c.eps) + " " + format_double(c.eta));
      put(rep, "z45.eps", format_double(c.eps1) + " " + format_double(c.eps2) + " " +
                              format_double(c.eps3) + " " + format_double(c.eps4));
      put(rep, "z45.delta", format_double(c.delta1) + " " + format_double(c.delta2) + " " +
                                format_double(c.delta3) + " " + format_double(c.delta4));
    } catch (const InfeasibleError& e) {
      put(rep, "z45", std::string("not monitored (") + e.what() + ")");
    }
  }
  return req;
}

struct Simulation {
  State initial;
  Trajectory tr;
  SourceCertificate cert;
  double u0_mass = 0.0;
};

Simulation simulate(const ExperimentConfig& cfg, const DiagnosticsRequest& req,
                    const std::string& dir, Report& rep) {
  Simulation sim;
  sim.initial = build_initial_state(cfg);
  const auto f = SourceFunction::standard_logistic(cfg.params.kappa, cfg.params.mu);
  sim.cert = f.certificate();
  sim.tr = run(sim.initial, cfg.grid, cfg.params, &f, cfg.solver, req);
  sim.u0_mass = 0.0;
  for (double u : sim.initial.u) sim.u0_mass += u;
  sim.u0_mass *= cfg.grid.cell_volume();

  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir + "/diagnostics.csv");
    write_csv(csv, sim.tr.diagnostics);
  }
  if (cfg.write_snapshots) {
    for (std::size_t k = 0; k < sim.tr.states.size(); ++k) {
      char tag[16];
      std::snprintf(tag, sizeof tag, "%04zu", k);
      const State& s = sim.tr.states[k];
      write_snapshot(dir + "/snapshots/u_" + tag, "u", s.u, cfg.grid, s.t);
      write_snapshot(dir + "/snapshots/v_" + tag, "v", s.v, cfg.grid, s.t);
    }
  }
  put(rep, "outcome", to_string(sim.tr.outcome));
  if (!sim.tr.message.empty()) put(rep, "outcome_detail", sim.tr.message);
  put(rep, "steps", std::to_string(sim.tr.steps));
  put(rep, "t_final", sim.tr.states.back().t);
  put(rep, "clamp_count", std::to_string(sim.tr.clamp_count));
  return sim;
}

double sup_linf(const Trajectory& tr) {
  if (tr.outcome == Outcome::BlowupDetected) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (const auto& r : tr.diagnostics.records) m = std::max(m, r.Linf_u);
  return m;
}

// Appends an audit line; returns `ok`.
bool audit(Report& rep, const std::string& name, bool ok, const std::string& detail = "") {
  put(rep, "audit." + name, std::string(ok ? "pass" : "fail") + (detail.empty() ? "" : " (" + detail + ")"));
  return ok;
}

bool basic_audits(const Simulation& sim, const ExperimentConfig& cfg, Report& rep) {
  bool ok = audit(rep, "clamp_count_zero", sim.tr.clamp_count == 0,
                  std::to_string(sim.tr.clamp_count) + " clamped entries");
  const auto mass = mass_bound_check(sim.tr.diagnostics, sim.cert, sim.u0_mass, cfg.grid.measure());
  ok &= audit(rep, "mass_bound", mass.passed,
              "bound " + format_double(mass.bound) + ", worst margin " +
                  format_double(mass.worst_margin));
  return ok;
}

bool convergence_audits(const Simulation& sim, const ExperimentConfig& cfg,
                        const ThresholdReport& thr, Report& rep) {
  const auto v = convergence_audit(sim.tr.diagnostics, cfg.params, thr);
  bool ok = true;
  for (const auto& item : v.items) {
    ok &= audit(rep, item.name, item.passed,
                "observed " + format_double(item.observed) + ", required " +
                    format_double(item.required));
  }
  if (v.h_monotone) ok &= audit(rep, "H_nonincreasing", *v.h_monotone);
  if (!v.note.empty()) put(rep, "audit.note", v.note);
  put(rep, "audit.regime", v.regime);
  return ok && v.passed;
}

int outcome_code(const Trajectory& tr) {
  switch (tr.outcome) {
    case Outcome::Completed: return kExitPass;
    case Outcome::BlowupDetected: return kExitBlowup;
    case Outcome::DtCollapse: return kExitAuditFail;
  }
  return kExitAuditFail;
}

void fill_common(ScenarioResult& res, const Simulation& sim, const ThresholdReport& thr) {
  res.outcome = sim.tr.outcome;
  res.sup_linf_u = sup_linf(sim.tr);
  res.mu0 = thr.mu0;
  res.mu_exceeds_mu0 = thr.mu_exceeds_mu0;
  try {
    const auto& d = sim.tr.diagnostics;
    res.linf_fit = fit_decay(d.times(), d.column("Linf_u"));
  } catch (const InputError&) {
  }
  put(res.report, "sup_linf_u", res.sup_linf_u);
}

int run_simulation_scenario(const ExperimentConfig& cfg, ScenarioResult& res) {
  Report& rep = res.report;
  const auto thr = report(cfg.params, cfg.convex);
  for (auto& kv : describe(thr)) rep.push_back(std::move(kv));
  const auto req = build_request(cfg.params, rep);
  const Simulation sim = simulate(cfg, req, cfg.output_dir, rep);
  fill_common(res, sim, thr);
  const int code = outcome_code(sim.tr);
  if (code != kExitPass) return code;

  bool ok = basic_audits(sim, cfg, rep);
  switch (cfg.scenario) {
    case ScenarioKind::Boundedness:
      if (req.z3 || req.z45) {
        const bool zb = z_bounded(sim.tr.diagnostics);
        const double t_end = sim.tr.states.back().t;
        ok &= audit(rep, "z_bounded", zb,
                    "max over final third " +
                        format_double(max_z_in(sim.tr.diagnostics, 2.0 * t_end / 3.0, t_end)) +
                        ", over first third " +
                        format_double(max_z_in(sim.tr.diagnostics, 0.0, t_end / 3.0)));
      }
      break;
    case ScenarioKind::ConvergencePositiveKappa:
    case ScenarioKind::DecayZeroKappa:
    case ScenarioKind::DecayNegativeKappa:
      ok &= convergence_audits(sim, cfg, thr, rep);
      break;
    default:
      break;
  }
  return ok ? kExitPass : kExitAuditFail;
}

int run_convex_comparison(const ExperimentConfig& cfg, ScenarioResult& res) {
  Report& rep = res.report;
  const Threshold convex = mu0_general(cfg.params, true);
  const Threshold general = mu0_general(cfg.params, false);
  put(rep, "mu0_convex", convex.value);
  put(rep, "mu0_general", general.value);
  put(rep, "mu_exceeds_mu0_convex", yes_no(cfg.params.mu > convex.value));
  put(rep, "mu_exceeds_mu0_general", yes_no(cfg.params.mu > general.value));
  put(rep, "mu1", mu1(cfg.params));

  Report scratch;
  const auto req = build_request(cfg.params, rep);
  const Simulation a = simulate(cfg, req, cfg.output_dir + "/convex", scratch);
  const Simulation b = simulate(cfg, req, cfg.output_dir + "/general", scratch);
  auto thr = report(cfg.params, true);
  fill_common(res, a, thr);
  put(rep, "outcome", to_string(a.tr.outcome));
  const int code = std::max(outcome_code(a.tr), outcome_code(b.tr));
  if (code != kExitPass) return code;

  bool ok = audit(rep, "runs_identical",
                  a.tr.states.back().u == b.tr.states.back().u &&
                      a.tr.states.back().v == b.tr.states.back().v);
  ok &= basic_audits(a, cfg, rep);
  put(rep, "observed_bounded", yes_no(a.tr.outcome == Outcome::Completed));
  return ok ? kExitPass : kExitAuditFail;
}

int run_small_diffusion_sweep(const ExperimentConfig& cfg, ScenarioResult& res) {
  Report& rep = res.report;
  SweepSpec spec;
  spec.axis = cfg.sweep_axis;
  spec.values = cfg.sweep_values;
  spec.base = cfg;
  spec.base.scenario = ScenarioKind::Boundedness;
  const auto rows = run_sweep(spec);

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return rows[l].value > rows[r].value; });
  bool monotone = true;
  std::string trail;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& row = rows[order[k]];
    trail += (k ? " " : "") + format_double(row.value) + ":" + format_double(row.sup_linf_u);
    if (row.exit_code == kExitConfig) monotone = false;
    if (k > 0 && row.sup_linf_u < rows[order[k - 1]].sup_linf_u) monotone = false;
  }
  put(rep, "sweep_axis", cfg.sweep_axis);
  put(rep, "sweep_sup_linf_u", trail);
  res.sup_linf_u = 0.0;
  for (const auto& r : rows) res.sup_linf_u = std::max(res.sup_linf_u, r.sup_linf_u);
  return audit(rep, "sup_linf_u_nondecreasing_as_value_decreases", monotone) ? kExitPass
                                                                              : kExitAuditFail;
}

int run_manufactured(const ExperimentConfig& cfg, ScenarioResult& res) {
  Report& rep = res.report;
  const int c0 = cfg.grid.cells(0);
  std::vector<Grid> grids;
  for (int k = 0; k < 4; ++k) grids.emplace_back(1, std::array<double, 3>{1.0, 1.0, 1.0},
                                                 std::array<int, 3>{c0 << k, 1, 1});
  const auto diff = refinement_study(diffusion_manufactured(cfg.params.d1), grids);
  const auto chem = refinement_study(chemotaxis_manufactured(cfg.params), grids);
  auto describe = [](const RefinementResult& r) {
    std::string s;
    for (std::size_t i = 0; i < r.errors.size(); ++i)
      s += (i ? " " : "") + std::to_string(r.cells[i]) + ":" + format_double(r.errors[i]);
    return s;
  };
  put(rep, "diffusion_errors", describe(diff));
  put(rep, "diffusion_order", diff.observed_order);
  put(rep, "chemotaxis_errors", describe(chem));
  put(rep, "chemotaxis_order", chem.observed_order);
  bool ok = audit(rep, "diffusion_order", std::abs(diff.observed_order - 2.0) <= 0.2, "2.0 +- 0.2");
  ok &= audit(rep, "chemotaxis_order", chem.observed_order >= 0.8 && chem.observed_order <= 2.0,
              "[0.8, 2.0]");
  return ok ? kExitPass : kExitAuditFail;
}

}  // namespace

State build_initial_state(const ExperimentConfig& cfg) {
  InitialConditionSpec spec = cfg.ic;
  spec.seed = cfg.seed;
  if (spec.kind == IcKind::CustomField) {
    auto load = [&](const std::string& path) {
      const Snapshot s = read_snapshot(path);
      if (s.values.size() != cfg.grid.size())
        throw InputError("custom field '" + path + "' does not match the grid");
      return s.values;
    };
    spec.u_field = load(cfg.ic_u_file);
    spec.v_field = load(cfg.ic_v_file);
  }
  return initial_condition(spec, cfg.grid);
}

ScenarioResult run_scenario(const ExperimentConfig& cfg) {
  ScenarioResult res;
  put(res.report, "scenario", to_string(cfg.scenario));
  try {
    check_scenario_constraints(cfg);
    validate(cfg.params);
    validate(cfg.solver);
    switch (cfg.scenario) {
      case ScenarioKind::ConvexComparison: res.exit_code = run_convex_comparison(cfg, res); break;
      case ScenarioKind::SmallDiffusionSweep: res.exit_code = run_small_diffusion_sweep(cfg, res); break;
      case ScenarioKind::ManufacturedOrder: res.exit_code = run_manufactured(cfg, res); break;
      default: res.exit_code = run_simulation_scenario(cfg, res); break;
    }
  } catch (const InputError& e) {
    res.exit_code = kExitConfig;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitAuditFail;
    res.message = e.what();
  }
  if (!res.message.empty()) put(res.report, "error", res.message);
  put(res.report, "verdict", res.exit_code == kExitPass ? "pass" : "fail");
  put(res.report, "exit_code", std::to_string(res.exit_code));
  try {
    write_report(cfg.output_dir + "/report.txt", res.report);
  } catch (const std::exception& e) {
    if (res.message.empty()) res.message = e.what();
  }
  return res;
}

}  // namespace kslab
