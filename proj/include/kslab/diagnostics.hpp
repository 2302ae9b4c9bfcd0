#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kslab/params.hpp"
#include "kslab/thresholds.hpp"

namespace kslab {

/// Norms and functionals of one sampled state.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass_u = 0.0;
  double L2_u = 0.0;
  double L3_u = 0.0;
  double Linf_u = 0.0;
  double L2_gradv = 0.0;
  double L4_gradv = 0.0;
  double L6_gradv = 0.0;
  std::optional<double> z3;
  std::optional<double> z45;
  std::optional<double> H;
  std::size_t clamp_count = 0;

  // not part of the CSV table, used by the audits
  double Linf_v = 0.0;
  double min_u = 0.0;
  double eq_deviation = 0.0;  // |u - kappa/mu|_inf + |v - alpha kappa/(beta mu)|_inf
};

struct DiagnosticsSeries {
  std::vector<DiagnosticsRecord> records;
  bool vacuum_encountered = false;  // H requested but min u <= 1e-12 at some sample

  std::vector<double> times() const;
  /// Values of a CSV column, or of Linf_v / eq_deviation. Throws on an
  /// unknown name or on a functional absent at some sample.
  std::vector<double> column(const std::string& name) const;
};

/// Which functionals to evaluate at each sample.
struct DiagnosticsRequest {
  std::optional<CoefficientSet3D> z3;
  std::optional<CoefficientSet45D> z45;
  bool lyapunov = false;  // only honoured when kappa > 0
};

inline constexpr double kInfNorm = -1.0;

/// Midpoint-rule L^p norm for p in {1,2,3,4,6}; pass kInfNorm for the max norm.
double lp_norm(std::span<const double> field, double p, const Grid& grid);

/// |grad v|^2 at cell centres: per axis, the mean of the two adjacent face
/// differences, with boundary faces contributing zero.
std::vector<double> gradient_squared(std::span<const double> v, const Grid& grid);

double functional_z3(const State& s, const Grid& grid, const CoefficientSet3D& c);
double functional_z45(const State& s, const Grid& grid, const CoefficientSet45D& c);

/// Entropy-type distance to the constant equilibrium. Requires kappa > 0
/// and u > 0 in every cell; throws InputError("H undefined at vacuum") otherwise.
double lyapunov_H(const State& s, const Grid& grid, const Parameters& p);

/// Smallest u for which lyapunov_H is evaluated along a run.
inline constexpr double kVacuumFloor = 1e-12;

DiagnosticsRecord sample(const State& s, const Grid& grid, const Parameters& p,
                         const DiagnosticsRequest& req, std::size_t clamp_count);

struct MassBoundResult {
  bool passed = true;
  double bound = 0.0;
  double worst_margin = 0.0;  // min over samples of bound - mass
  std::optional<std::size_t> first_violation;
};

/// Checks mass(t) <= |u0|_1 + (a + 1/(4 mu))|Omega| + 1e-6 at every sample,
/// with (a, mu) taken from the source certificate.
MassBoundResult mass_bound_check(const DiagnosticsSeries& series, const SourceCertificate& cert,
                                 double u0_mass, double volume);

enum class DecayModel { Exponential, Algebraic, None };
std::string to_string(DecayModel m);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct DecayFit {
  DecayModel model = DecayModel::None;
  double rate = 0.0;      // minus the slope of the selected fit
  double goodness = 0.0;  // R^2 of the selected fit
  std::pair<double, double> window{0.0, 0.0};
  LineFit exponential;  // ln(y) against t
  LineFit algebraic;    // ln(y) against ln(1+t)
  std::size_t samples = 0;
};

/// Least-squares decay fit over samples with t in [window.first, window.second].
/// Without a window the last half of the time range is used. Needs at least
/// 10 samples in the window, all positive.
DecayFit fit_decay(std::span<const double> times, std::span<const double> values,
                   std::optional<std::pair<double, double>> window = std::nullopt);

struct AuditItem {
  std::string name;
  double observed = 0.0;
  double required = 0.0;
  bool passed = false;
};

struct AuditVerdict {
  std::string regime;  // "kappa>0", "kappa=0", "kappa<0"
  std::vector<AuditItem> items;
  std::optional<bool> h_monotone;  // empty if not applicable or vacuum
  std::string note;
  bool passed = false;
};

/// Per-regime decay audit of a completed run against the predicted rates.
/// Throws InputError for an empty series or (kappa > 0) a report without gamma.
AuditVerdict convergence_audit(const DiagnosticsSeries& series, const Parameters& p,
                               const ThresholdReport& report, double tolerance = 1e-6,
                               std::optional<std::pair<double, double>> window = std::nullopt);

/// True if H(t_{k+1}) <= H(t_k) + rel_tol * H(t_0) for every consecutive pair.
bool h_nonincreasing(const DiagnosticsSeries& series, double rel_tol = 1e-8);

/// z over the final third of the run never exceeds (1 + slack) times its
/// maximum over the first third. Uses z3 if present, else z45.
bool z_bounded(const DiagnosticsSeries& series, double slack = 0.05);

/// Maximum of z over samples with t in [lo, hi].
double max_z_in(const DiagnosticsSeries& series, double lo, double hi);

/// CSV with header t,mass_u,L2_u,L3_u,Linf_u,L2_gradv,L4_gradv,L6_gradv,z3,z45,H,clamp_count.
void write_csv(std::ostream& os, const DiagnosticsSeries& series);

/// Reads a table written by write_csv (or any CSV with a header row) and
/// returns the named column; empty cells are rejected.
std::vector<double> read_csv_column(std::istream& is, const std::string& column);

}  // namespace kslab
