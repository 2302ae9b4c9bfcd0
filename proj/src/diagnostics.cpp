#include "kslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "kslab/error.hpp"

namespace kslab {

namespace {

template <class Fn>
double integrate(const Grid& grid, Fn&& integrand) {
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) sum += integrand(i);
  return sum * grid.cell_volume();
}

void require_size(std::span<const double> field, const Grid& grid) {
  if (field.size() != grid.size()) throw InputError("field size does not match grid");
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  if (syy <= 1e-30 * std::max(1.0, n * my * my)) {
    f.r_squared = 0.0;  // zero-variance data: no evidence for either model
  } else {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (f.intercept + f.slope * x[i]);
      ssr += e * e;
    }
    f.r_squared = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  }
  return f;
}

std::vector<double> z_series(const DiagnosticsSeries& s) {
  const bool have3 = !s.records.empty() &&
                     std::all_of(s.records.begin(), s.records.end(),
                                 [](const DiagnosticsRecord& r) { return r.z3.has_value(); });
  if (have3) return s.column("z3");
  return s.column("z45");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

}  // namespace

std::vector<double> DiagnosticsSeries::times() const {
  std::vector<double> t;
  t.reserve(records.size());
  for (const auto& r : records) t.push_back(r.t);
  return t;
}

std::vector<double> DiagnosticsSeries::column(const std::string& name) const {
  using Getter = double (*)(const DiagnosticsRecord&);
  static const std::pair<const char*, Getter> plain[] = {
      {"t", [](const DiagnosticsRecord& r) { return r.t; }},
      {"mass_u", [](const DiagnosticsRecord& r) { return r.mass_u; }},
      {"L2_u", [](const DiagnosticsRecord& r) { return r.L2_u; }},
      {"L3_u", [](const DiagnosticsRecord& r) { return r.L3_u; }},
      {"Linf_u", [](const DiagnosticsRecord& r) { return r.Linf_u; }},
      {"L2_gradv", [](const DiagnosticsRecord& r) { return r.L2_gradv; }},
      {"L4_gradv", [](const DiagnosticsRecord& r) { return r.L4_gradv; }},
      {"L6_gradv", [](const DiagnosticsRecord& r) { return r.L6_gradv; }},
      {"clamp_count",
       [](const DiagnosticsRecord& r) { return static_cast<double>(r.clamp_count); }},
      {"Linf_v", [](const DiagnosticsRecord& r) { return r.Linf_v; }},
      {"min_u", [](const DiagnosticsRecord& r) { return r.min_u; }},
      {"eq_deviation", [](const DiagnosticsRecord& r) { return r.eq_deviation; }},
  };
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& [key, get] : plain) {
    if (name == key) {
      for (const auto& r : records) out.push_back(get(r));
      return out;
    }
  }
  using Optional = std::optional<double> DiagnosticsRecord::*;
  Optional member = nullptr;
  if (name == "z3") member = &DiagnosticsRecord::z3;
  if (name == "z45") member = &DiagnosticsRecord::z45;
  if (name == "H") member = &DiagnosticsRecord::H;
  if (!member) throw InputError("unknown diagnostics column '" + name + "'");
  for (const auto& r : records) {
    const auto& v = r.*member;
    if (!v) throw InputError("column '" + name + "' is missing at t=" + fmt(r.t));
    out.push_back(*v);
  }
  return out;
}

double lp_norm(std::span<const double> field, double p, const Grid& grid) {
  require_size(field, grid);
  if (p == kInfNorm) {
    double m = 0.0;
    for (double x : field) m = std::max(m, std::abs(x));
    return m;
  }
  if (p != 1.0 && p != 2.0 && p != 3.0 && p != 4.0 && p != 6.0)
    throw InputError("lp_norm supports p in {1,2,3,4,6,inf}");
  const double s = integrate(grid, [&](std::size_t i) { return std::pow(std::abs(field[i]), p); });
  return std::pow(s, 1.0 / p);
}

std::vector<double> gradient_squared(std::span<const double> v, const Grid& grid) {
  require_size(v, grid);
  std::vector<double> g2(grid.size(), 0.0);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const std::size_t stride = grid.stride(axis);
    const auto n = static_cast<std::size_t>(grid.cells(axis));
    const double h = grid.spacing(axis);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      const std::size_t i = (idx / stride) % n;
      const double left = i > 0 ? (v[idx] - v[idx - stride]) / h : 0.0;
      const double right = i + 1 < n ? (v[idx + stride] - v[idx]) / h : 0.0;
      const double c = 0.5 * (left + right);
      g2[idx] += c * c;
    }
  }
  return g2;
}

double functional_z3(const State& s, const Grid& grid, const CoefficientSet3D& c) {
  require_size(s.u, grid);
  const auto g = gradient_squared(s.v, grid);
  return integrate(grid, [&](std::size_t i) {
    const double u = s.u[i];
    return c.delta1 * u * u + c.delta2 * u * g[i] + c.delta3 * g[i] * g[i];
  });
}

double functional_z45(const State& s, const Grid& grid, const CoefficientSet45D& c) {
  require_size(s.u, grid);
  const auto g = gradient_squared(s.v, grid);
  return integrate(grid, [&](std::size_t i) {
    const double u = s.u[i];
    return c.delta1 * u * u * u + c.delta2 * u * u * g[i] + c.delta3 * u * g[i] * g[i] +
           c.delta4 * g[i] * g[i] * g[i];
  });
}

double lyapunov_H(const State& s, const Grid& grid, const Parameters& p) {
  if (!(p.kappa > 0.0)) throw InputError("H requires kappa > 0");
  require_size(s.u, grid);
  require_size(s.v, grid);
  for (double u : s.u)
    if (!(u > 0.0)) throw InputError("H undefined at vacuum");
  const double ustar = p.kappa / p.mu;
  const double vstar = p.alpha * p.kappa / (p.beta * p.mu);
  const double weight = p.kappa * p.chi * p.chi / (8.0 * p.d1 * p.d2 * p.mu);
  return integrate(grid, [&](std::size_t i) {
    const double r = (s.u[i] - ustar) / ustar;
    const double entropy = std::max(0.0, ustar * (r - std::log1p(r)));
    const double dv = s.v[i] - vstar;
    return entropy + weight * dv * dv;
  });
}

DiagnosticsRecord sample(const State& s, const Grid& grid, const Parameters& p,
                         const DiagnosticsRequest& req, std::size_t clamp_count) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass_u = integrate(grid, [&](std::size_t i) { return s.u[i]; });
  r.L2_u = lp_norm(s.u, 2.0, grid);
  r.L3_u = lp_norm(s.u, 3.0, grid);
  r.Linf_u = lp_norm(s.u, kInfNorm, grid);
  r.Linf_v = lp_norm(s.v, kInfNorm, grid);

  const auto g2 = gradient_squared(s.v, grid);
  r.L2_gradv = std::sqrt(integrate(grid, [&](std::size_t i) { return g2[i]; }));
  r.L4_gradv = std::pow(integrate(grid, [&](std::size_t i) { return g2[i] * g2[i]; }), 0.25);
  r.L6_gradv =
      std::cbrt(std::sqrt(integrate(grid, [&](std::size_t i) { return g2[i] * g2[i] * g2[i]; })));

  r.min_u = s.u.empty() ? 0.0 : *std::min_element(s.u.begin(), s.u.end());
  const double ustar = std::max(p.kappa, 0.0) / p.mu;
  const double vstar = p.alpha * ustar / p.beta;
  double du = 0.0, dv = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    du = std::max(du, std::abs(s.u[i] - ustar));
    dv = std::max(dv, std::abs(s.v[i] - vstar));
  }
  r.eq_deviation = du + dv;

  if (req.z3) r.z3 = functional_z3(s, grid, *req.z3);
  if (req.z45) r.z45 = functional_z45(s, grid, *req.z45);
  if (req.lyapunov && p.kappa > 0.0 && r.min_u > kVacuumFloor) r.H = lyapunov_H(s, grid, p);
  r.clamp_count = clamp_count;
  return r;
}

MassBoundResult mass_bound_check(const DiagnosticsSeries& series, const SourceCertificate& cert,
                                 double u0_mass, double volume) {
  MassBoundResult m;
  m.bound = u0_mass + (cert.a + 1.0 / (4.0 * cert.mu)) * volume;
  m.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < series.records.size(); ++k) {
    const double margin = m.bound - series.records[k].mass_u;
    m.worst_margin = std::min(m.worst_margin, margin);
    if (!(margin >= -1e-6) && !m.first_violation) {
      m.first_violation = k;
      m.passed = false;
    }
  }
  return m;
}

std::string to_string(DecayModel m) {
  switch (m) {
    case DecayModel::Exponential: return "exponential";
    case DecayModel::Algebraic: return "algebraic";
    case DecayModel::None: return "none";
  }
  return "none";
}

DecayFit fit_decay(std::span<const double> times, std::span<const double> values,
                   std::optional<std::pair<double, double>> window) {
  if (times.size() != values.size()) throw InputError("times and values differ in length");
  if (times.empty()) throw InputError("empty series");
  DecayFit fit;
  fit.window = window.value_or(std::pair{0.5 * times.back(), times.back()});
  if (!(fit.window.first <= fit.window.second)) throw InputError("window must satisfy A <= B");
  std::vector<double> t, lt, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < fit.window.first || times[i] > fit.window.second) continue;
    if (!(values[i] > 0.0)) throw InputError("fit_decay needs positive values");
    if (times[i] <= -1.0) throw InputError("fit_decay needs t > -1");
    t.push_back(times[i]);
    lt.push_back(std::log1p(times[i]));
    ly.push_back(std::log(values[i]));
  }
  if (t.size() < 10) throw InputError("fit_decay needs at least 10 samples in the window");
  fit.samples = t.size();
  fit.exponential = least_squares(t, ly);
  fit.algebraic = least_squares(lt, ly);
  const double re = fit.exponential.r_squared, ra = fit.algebraic.r_squared;
  if (re < 0.9 && ra < 0.9) {
    fit.model = DecayModel::None;
    fit.goodness = std::max(re, ra);
    fit.rate = 0.0;
  } else if (re >= ra) {
    fit.model = DecayModel::Exponential;
    fit.goodness = re;
    fit.rate = -fit.exponential.slope;
  } else {
    fit.model = DecayModel::Algebraic;
    fit.goodness = ra;
    fit.rate = -fit.algebraic.slope;
  }
  return fit;
}

bool h_nonincreasing(const DiagnosticsSeries& series, double rel_tol) {
  const auto h = series.column("H");
  if (h.empty()) return true;
  const double tol = rel_tol * h.front();
  for (std::size_t k = 1; k < h.size(); ++k)
    if (h[k] > h[k - 1] + tol) return false;
  return true;
}

double max_z_in(const DiagnosticsSeries& series, double lo, double hi) {
  const auto z = z_series(series);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double t = series.records[k].t;
    if (t >= lo && t <= hi) m = std::max(m, z[k]);
  }
  return m;
}

bool z_bounded(const DiagnosticsSeries& series, double slack) {
  if (series.records.empty()) throw InputError("empty series");
  const double t_end = series.records.back().t;
  const double first = max_z_in(series, 0.0, t_end / 3.0);
  const double last = max_z_in(series, 2.0 * t_end / 3.0, t_end);
  return last <= (1.0 + slack) * first;
}

AuditVerdict convergence_audit(const DiagnosticsSeries& series, const Parameters& p,
                               const ThresholdReport& report, double tolerance,
                               std::optional<std::pair<double, double>> window) {
  if (series.records.empty()) throw InputError("convergence_audit needs a nonempty series");
  AuditVerdict v;
  const auto t = series.times();
  const double n1 = p.n + 1.0;

  auto check = [&](const std::string& name, const std::string& column, bool exponential,
                   double required) {
    AuditItem item;
    item.name = name;
    item.required = required;
    try {
      const auto fit = fit_decay(t, series.column(column), window);
      item.observed = exponential ? -fit.exponential.slope : -fit.algebraic.slope;
      item.passed = item.observed >= required - tolerance;
    } catch (const InputError& e) {
      item.observed = std::numeric_limits<double>::quiet_NaN();
      item.passed = false;
      if (!v.note.empty()) v.note += "; ";
      v.note += name + ": " + e.what();
    }
    v.items.push_back(std::move(item));
  };

  if (p.kappa > 0.0) {
    v.regime = "kappa>0";
    if (!report.gamma) throw InputError("kappa > 0 audit needs gamma (mu > mu1, chi != 0)");
    check("exp_rate_eq_deviation", "eq_deviation", true, *report.gamma);
    if (p.mu > std::max(report.mu0, report.mu1)) {
      if (series.vacuum_encountered) {
        if (!v.note.empty()) v.note += "; ";
        v.note += "vacuum encountered";
      } else if (std::all_of(series.records.begin(), series.records.end(),
                             [](const DiagnosticsRecord& r) { return r.H.has_value(); })) {
        v.h_monotone = h_nonincreasing(series);
      }
    }
  } else if (p.kappa == 0.0) {
    v.regime = "kappa=0";
    check("alg_rate_Linf_u", "Linf_u", false, 1.0 / n1);
    check("alg_rate_Linf_v", "Linf_v", false, 1.0 / n1);
  } else {
    v.regime = "kappa<0";
    check("exp_rate_Linf_u", "Linf_u", true, -p.kappa / n1);
    check("exp_rate_Linf_v", "Linf_v", true, std::min(p.beta, -p.kappa) / (2.0 * n1));
  }
  v.passed = std::all_of(v.items.begin(), v.items.end(), [](const AuditItem& i) { return i.passed; }) &&
             v.h_monotone.value_or(true);
  return v;
}

void write_csv(std::ostream& os, const DiagnosticsSeries& series) {
  os << "t,mass_u,L2_u,L3_u,Linf_u,L2_gradv,L4_gradv,L6_gradv,z3,z45,H,clamp_count\n";
  auto opt = [](const std::optional<double>& x) { return x ? fmt(*x) : std::string(); };
  for (const auto& r : series.records) {
    os << fmt(r.t) << ',' << fmt(r.mass_u) << ',' << fmt(r.L2_u) << ',' << fmt(r.L3_u) << ','
       << fmt(r.Linf_u) << ',' << fmt(r.L2_gradv) << ',' << fmt(r.L4_gradv) << ','
       << fmt(r.L6_gradv) << ',' << opt(r.z3) << ',' << opt(r.z45) << ',' << opt(r.H) << ','
       << r.clamp_count << '\n';
  }
}

std::vector<double> read_csv_column(std::istream& is, const std::string& column) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(is, line)) throw InputError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw InputError("CSV has no column '" + column + "'");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (col >= cells.size() || cells[col].empty())
      throw InputError("CSV row " + std::to_string(row) + " has no value for '" + column + "'");
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(cells[col], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cells[col].size())
      throw InputError("CSV row " + std::to_string(row) + ": cannot parse '" + cells[col] + "'");
    out.push_back(x);
  }
  return out;
}

}  // namespace kslab
