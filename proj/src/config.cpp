#include "kslab/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "kslab/error.hpp"
#include "kslab/thresholds.hpp"

namespace kslab {

namespace {

const char* const kScenarioNames[] = {
    "boundedness",      "convergence-positive-kappa", "decay-zero-kappa",
    "decay-negative-kappa", "convex-comparison",     "small-diffusion-sweep",
    "manufactured-order",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string list(const double* x, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? ", " : "") + num(x[i]);
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

// Typed access to one section; every key read is removed so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(std::string name, std::map<std::string, Entry> entries)
      : name_(std::move(name)), entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<Entry> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    Entry e = it->second;
    entries_.erase(it);
    return e;
  }

  Entry require(const std::string& key) {
    auto e = take(key);
    if (!e) throw InputError("[" + name_ + "] missing required key '" + key + "'");
    return *e;
  }

  [[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& what) const {
    throw InputError("line " + std::to_string(e.line) + ": [" + name_ + "] " + key + ": " + what);
  }

  double to_double(const Entry& e, const std::string& key) const {
    double x = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || e.value.empty())
      fail(e, key, "expected a number, got '" + e.value + "'");
    return x;
  }

  long long to_int(const Entry& e, const std::string& key) const {
    long long x = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || e.value.empty())
      fail(e, key, "expected an integer, got '" + e.value + "'");
    return x;
  }

  std::uint64_t to_uint(const Entry& e, const std::string& key) const {
    std::uint64_t x = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || e.value.empty())
      fail(e, key, "expected a nonnegative integer, got '" + e.value + "'");
    return x;
  }

  bool to_bool(const Entry& e, const std::string& key) const {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    fail(e, key, "expected true or false, got '" + e.value + "'");
  }

  std::vector<double> to_list(const Entry& e, const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Entry sub{trim(item), e.line};
      out.push_back(to_double(sub, key));
    }
    if (out.empty()) fail(e, key, "expected a comma-separated list");
    return out;
  }

  double get(const std::string& key, double fallback) {
    auto e = take(key);
    return e ? to_double(*e, key) : fallback;
  }

  void finish() const {
    if (!entries_.empty()) {
      const auto& [key, e] = *entries_.begin();
      throw InputError("line " + std::to_string(e.line) + ": [" + name_ + "] unknown key '" +
                       key + "'");
    }
  }

 private:
  std::string name_;
  std::map<std::string, Entry> entries_;
};

Scheme parse_scheme(const std::string& s) {
  if (s == "imex-adi") return Scheme::ImexAdi;
  if (s == "fully-explicit") return Scheme::FullyExplicit;
  throw InputError("unknown scheme '" + s + "' (expected imex-adi or fully-explicit)");
}

IcKind parse_ic_kind(const std::string& s) {
  for (IcKind k : {IcKind::ConstantPlusPerturbation, IcKind::GaussianBump, IcKind::CustomField})
    if (to_string(k) == s) return k;
  throw InputError("unknown initial condition kind '" + s + "'");
}

// Rethrows a validation error with the config location attached.
template <class Fn>
void at_key(Section& sec, const Entry& e, const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const InputError& err) {
    sec.fail(e, key, err.what());
  }
}

}  // namespace

std::string to_string(ScenarioKind k) { return kScenarioNames[static_cast<int>(k)]; }

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (name == kScenarioNames[i]) return static_cast<ScenarioKind>(i);
  throw InputError("unknown scenario '" + name + "'");
}

void set_parameter(Parameters& p, const std::string& name, double value) {
  if (name == "d1") p.d1 = value;
  else if (name == "d2") p.d2 = value;
  else if (name == "chi") p.chi = value;
  else if (name == "alpha") p.alpha = value;
  else if (name == "beta") p.beta = value;
  else if (name == "kappa") p.kappa = value;
  else if (name == "mu") p.mu = value;
  else if (name == "a") p.a = value;
  else if (name == "n") {
    if (value != std::floor(value)) throw InputError("n must be an integer");
    p.n = static_cast<int>(value);
  } else {
    throw InputError("'" + name + "' is not a parameter name");
  }
}

void check_scenario_constraints(const ExperimentConfig& cfg) {
  const Parameters& p = cfg.params;
  if (p.n < 3 || p.n > 5) throw InputError("n must be 3, 4 or 5 for threshold reports");
  switch (cfg.scenario) {
    case ScenarioKind::ConvergencePositiveKappa:
      if (!(p.kappa > 0.0)) throw InputError("convergence-positive-kappa requires kappa > 0");
      if (p.chi == 0.0) throw InputError("convergence-positive-kappa requires chi != 0");
      if (!(p.mu > mu1(p))) throw InputError("convergence-positive-kappa requires mu > mu1");
      break;
    case ScenarioKind::DecayZeroKappa:
      if (p.kappa != 0.0) throw InputError("decay-zero-kappa requires kappa = 0");
      break;
    case ScenarioKind::DecayNegativeKappa:
      if (!(p.kappa < 0.0)) throw InputError("decay-negative-kappa requires kappa < 0");
      break;
    case ScenarioKind::ConvexComparison:
      if (p.d1 != p.d2 || !(p.chi > 0.0))
        throw InputError("convex-comparison requires d1 = d2 and chi > 0");
      break;
    case ScenarioKind::SmallDiffusionSweep:
      for (double v : cfg.sweep_values) {
        Parameters q = p;
        set_parameter(q, cfg.sweep_axis, v);
        validate(q);
      }
      break;
    case ScenarioKind::Boundedness:
    case ScenarioKind::ManufacturedOrder:
      break;
  }
  if (cfg.ic.kind == IcKind::CustomField && (cfg.ic_u_file.empty() || cfg.ic_v_file.empty()))
    throw InputError("custom-field initial data needs u_file and v_file");
}

ExperimentConfig parse_config(const std::string& text) {
  static const char* const known[] = {"params", "grid", "solver", "ic", "scenario"};
  std::map<std::string, std::map<std::string, Entry>> raw;
  std::string current;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError("line " + std::to_string(lineno) + ": bad section header");
      current = trim(line.substr(1, line.size() - 2));
      if (std::find(std::begin(known), std::end(known), current) == std::end(known))
        throw InputError("line " + std::to_string(lineno) + ": unknown section [" + current + "]");
      raw[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("line " + std::to_string(lineno) + ": expected key = value");
    if (current.empty())
      throw InputError("line " + std::to_string(lineno) + ": key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!raw[current].emplace(key, Entry{value, lineno}).second)
      throw InputError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }

  ExperimentConfig cfg;

  Section params("params", raw["params"]);
  Parameters& p = cfg.params;
  for (const char* key : {"d1", "d2", "chi", "alpha", "beta", "kappa", "mu"}) {
    const Entry e = params.require(key);
    set_parameter(p, key, params.to_double(e, key));
  }
  p.a = params.get("a", 0.0);
  if (auto e = params.take("n")) p.n = static_cast<int>(params.to_int(*e, "n"));
  params.finish();
  try {
    validate(p);
  } catch (const InputError& err) {
    // name the key in the message: validate() reports e.g. "d1 must be positive"
    throw InputError(std::string("[params] ") + err.what());
  }

  Section grid("grid", raw["grid"]);
  {
    const Entry de = grid.require("dim");
    const long long dim = grid.to_int(de, "dim");
    const Entry ce = grid.require("cells");
    const auto cells = grid.to_list(ce, "cells");
    std::vector<double> extents{1.0};
    Entry ee{"1", ce.line};
    if (auto e = grid.take("extents")) {
      ee = *e;
      extents = grid.to_list(ee, "extents");
    }
    if (dim < 1 || dim > 3) grid.fail(de, "dim", "must be 1, 2 or 3");
    auto expand = [&](const std::vector<double>& v, const Entry& e, const std::string& key) {
      if (v.size() != 1 && v.size() != static_cast<std::size_t>(dim))
        grid.fail(e, key, "expected 1 or dim entries");
      std::array<double, 3> out{1.0, 1.0, 1.0};
      for (long long i = 0; i < dim; ++i) out[i] = v.size() == 1 ? v[0] : v[i];
      return out;
    };
    const auto c = expand(cells, ce, "cells");
    std::array<int, 3> ci{1, 1, 1};
    for (long long i = 0; i < dim; ++i) {
      if (c[i] != std::floor(c[i])) grid.fail(ce, "cells", "cell counts must be integers");
      ci[i] = static_cast<int>(c[i]);
    }
    const auto ex = expand(extents, ee, "extents");
    at_key(grid, ce, "cells", [&] { cfg.grid = Grid(static_cast<int>(dim), ex, ci); });
  }
  grid.finish();

  Section solver("solver", raw["solver"]);
  {
    SolverConfig& s = cfg.solver;
    s.dt_initial = solver.get("dt_initial", s.dt_initial);
    s.dt_min = solver.get("dt_min", s.dt_min);
    s.t_end = solver.get("t_end", s.t_end);
    s.cfl_safety = solver.get("cfl_safety", s.cfl_safety);
    s.blowup_linf_threshold = solver.get("blowup_linf_threshold", s.blowup_linf_threshold);
    if (auto e = solver.take("scheme")) at_key(solver, *e, "scheme", [&] { s.scheme = parse_scheme(e->value); });
    if (auto e = solver.take("snapshot_stride"))
      s.snapshot_stride = static_cast<int>(solver.to_int(*e, "snapshot_stride"));
    if (auto e = solver.take("strang")) s.strang = solver.to_bool(*e, "strang");
    if (auto e = solver.take("store_states")) s.store_states = solver.to_bool(*e, "store_states");
    try {
      validate(s);
    } catch (const InputError& err) {
      throw InputError(std::string("[solver] ") + err.what());
    }
  }
  solver.finish();

  Section scenario("scenario", raw["scenario"]);
  {
    const Entry ne = scenario.require("name");
    at_key(scenario, ne, "name", [&] { cfg.scenario = parse_scenario_kind(ne.value); });
    if (auto e = scenario.take("convex")) cfg.convex = scenario.to_bool(*e, "convex");
    if (auto e = scenario.take("output_dir")) cfg.output_dir = e->value;
    if (auto e = scenario.take("seed")) cfg.seed = scenario.to_uint(*e, "seed");
    if (auto e = scenario.take("write_snapshots"))
      cfg.write_snapshots = scenario.to_bool(*e, "write_snapshots");
    if (auto e = scenario.take("sweep_axis")) {
      cfg.sweep_axis = e->value;
      at_key(scenario, *e, "sweep_axis", [&] {
        Parameters q = p;
        set_parameter(q, cfg.sweep_axis, 1.0);
      });
    }
    if (auto e = scenario.take("sweep_values")) cfg.sweep_values = scenario.to_list(*e, "sweep_values");
  }
  scenario.finish();
  if (cfg.scenario == ScenarioKind::SmallDiffusionSweep && cfg.sweep_values.empty())
    cfg.sweep_values = {1.0, 0.5, 0.25, 0.125};

  Section ic("ic", raw["ic"]);
  {
    InitialConditionSpec& s = cfg.ic;
    if (auto e = ic.take("kind")) at_key(ic, *e, "kind", [&] { s.kind = parse_ic_kind(e->value); });
    s.u_base = ic.get("u_base", p.kappa > 0.0 ? p.kappa / p.mu : 1.0);
    s.v_base = ic.get("v_base", p.alpha * s.u_base / p.beta);
    s.amplitude = ic.get("amplitude", s.amplitude);
    s.width = ic.get("width", s.width);
    if (auto e = ic.take("center")) {
      const auto c = ic.to_list(*e, "center");
      if (c.size() != 3) ic.fail(*e, "center", "expected three coordinates");
      s.center = {c[0], c[1], c[2]};
    }
    if (auto e = ic.take("u_file")) cfg.ic_u_file = e->value;
    if (auto e = ic.take("v_file")) cfg.ic_v_file = e->value;
    if (s.u_base < 0.0 || s.v_base < 0.0) throw InputError("[ic] base values must be nonnegative");
    if (!(s.width > 0.0)) throw InputError("[ic] width must be positive");
    if (s.kind == IcKind::ConstantPlusPerturbation && s.amplitude < 0.0)
      throw InputError("[ic] amplitude must be nonnegative for constant-plus-perturbation");
    s.seed = cfg.seed;
  }
  ic.finish();

  check_scenario_constraints(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const Parameters& p = cfg.params;
  os << "[params]\n"
     << "d1 = " << num(p.d1) << "\nd2 = " << num(p.d2) << "\nchi = " << num(p.chi)
     << "\nalpha = " << num(p.alpha) << "\nbeta = " << num(p.beta) << "\nkappa = " << num(p.kappa)
     << "\nmu = " << num(p.mu) << "\na = " << num(p.a) << "\nn = " << p.n << "\n\n";

  const Grid& g = cfg.grid;
  double cells[3], extents[3];
  for (int i = 0; i < g.dim(); ++i) {
    cells[i] = g.cells(i);
    extents[i] = g.extent(i);
  }
  os << "[grid]\ndim = " << g.dim() << "\ncells = " << list(cells, g.dim())
     << "\nextents = " << list(extents, g.dim()) << "\n\n";

  const SolverConfig& s = cfg.solver;
  os << "[solver]\ndt_initial = " << num(s.dt_initial) << "\ndt_min = " << num(s.dt_min)
     << "\nt_end = " << num(s.t_end) << "\ncfl_safety = " << num(s.cfl_safety)
     << "\nscheme = " << to_string(s.scheme)
     << "\nblowup_linf_threshold = " << num(s.blowup_linf_threshold)
     << "\nsnapshot_stride = " << s.snapshot_stride << "\nstrang = " << (s.strang ? "true" : "false")
     << "\nstore_states = " << (s.store_states ? "true" : "false") << "\n\n";

  const InitialConditionSpec& ic = cfg.ic;
  os << "[ic]\nkind = " << to_string(ic.kind) << "\nu_base = " << num(ic.u_base)
     << "\nv_base = " << num(ic.v_base) << "\namplitude = " << num(ic.amplitude)
     << "\nwidth = " << num(ic.width) << "\ncenter = " << list(ic.center.data(), 3) << '\n';
  if (!cfg.ic_u_file.empty()) os << "u_file = " << cfg.ic_u_file << '\n';
  if (!cfg.ic_v_file.empty()) os << "v_file = " << cfg.ic_v_file << '\n';
  os << '\n';

  os << "[scenario]\nname = " << to_string(cfg.scenario)
     << "\nconvex = " << (cfg.convex ? "true" : "false") << "\noutput_dir = " << cfg.output_dir
     << "\nseed = " << cfg.seed << "\nwrite_snapshots = " << (cfg.write_snapshots ? "true" : "false")
     << "\nsweep_axis = " << cfg.sweep_axis << '\n';
  if (!cfg.sweep_values.empty())
    os << "sweep_values = "
       << list(cfg.sweep_values.data(), static_cast<int>(cfg.sweep_values.size())) << '\n';
  return os.str();
}

}  // namespace kslab
