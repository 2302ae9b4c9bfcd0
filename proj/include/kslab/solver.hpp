#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kslab/diagnostics.hpp"
#include "kslab/params.hpp"

namespace kslab {

enum class Scheme { ImexAdi, FullyExplicit };
enum class Outcome { Completed, BlowupDetected, DtCollapse };

std::string to_string(Scheme s);
std::string to_string(Outcome o);

struct SolverConfig {
  double dt_initial = 1e-2;
  double dt_min = 1e-10;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  Scheme scheme = Scheme::ImexAdi;
  double blowup_linf_threshold = 1e8;
  int snapshot_stride = 1;
  bool strang = false;        // half diffusion steps around the explicit part
  bool store_states = false;  // keep every sampled state, not just first and last

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Throws InputError unless dt_min < dt_initial, cfl_safety in (0,1],
/// blowup threshold > 0, t_end > 0 and snapshot_stride >= 1.
void validate(const SolverConfig& cfg);

enum class IcKind { ConstantPlusPerturbation, GaussianBump, CustomField };
std::string to_string(IcKind k);

struct InitialConditionSpec {
  IcKind kind = IcKind::GaussianBump;
  double u_base = 1.0;
  double v_base = 1.0;
  double amplitude = 0.0;
  double width = 0.1;                   // Gaussian: exp(-|x-c|^2 / width^2)
  std::array<double, 3> center{-1.0, -1.0, -1.0};  // negative entries mean box midpoint
  std::uint64_t seed = 0;
  std::vector<double> u_field, v_field;  // CustomField only

  friend bool operator==(const InitialConditionSpec&, const InitialConditionSpec&) = default;
};

/// Builds the t = 0 state. Perturbation noise is uniform in [-amplitude,
/// amplitude] from a seeded mt19937_64, shifted up if it would go negative.
State initial_condition(const InitialConditionSpec& spec, const Grid& grid);

/// Extra source terms (gu, gv) added to the right-hand sides, evaluated at
/// cell centres at time t. Used for manufactured solutions.
using Forcing = std::function<void(double t, const Grid& grid, std::vector<double>& gu,
                                   std::vector<double>& gv)>;

// In step, run and admissible_dt a null source means f = 0.

/// Largest step the explicit parts allow at this state (ignoring t_end and
/// dt_initial): chemotactic transport, reaction Lipschitz bound and beta,
/// plus the diffusion limit under the fully explicit scheme.
double admissible_dt(const State& s, const Grid& grid, const Parameters& p,
                     const SourceFunction* f, const SolverConfig& cfg);

struct StepResult {
  State state;
  double dt = 0.0;
  std::size_t clamped = 0;  // entries below -1e-12 reset to zero
};

/// One step of size dt. Explicit upwind chemotaxis and reactions, then
/// implicit diffusion by one tridiagonal sweep per axis.
StepResult step(const State& s, const Grid& grid, const Parameters& p, const SourceFunction* f,
                const SolverConfig& cfg, double dt, const Forcing& forcing = nullptr);

struct Trajectory {
  std::vector<State> states;  // first and last, or every sample if store_states
  DiagnosticsSeries diagnostics;
  Outcome outcome = Outcome::Completed;
  std::size_t steps = 0;
  std::size_t clamp_count = 0;
  std::string message;
};

/// Advances until t_end, blow-up (|u|_inf above the threshold or non-finite)
/// or dt collapse, sampling diagnostics every snapshot_stride steps and at
/// the final time.
Trajectory run(const State& initial, const Grid& grid, const Parameters& p,
               const SourceFunction* f, const SolverConfig& cfg,
               const DiagnosticsRequest& req = {}, const Forcing& forcing = nullptr);

/// Exact solution and forcing of a manufactured test problem.
struct ManufacturedProblem {
  Parameters params;
  std::function<double(const std::array<double, 3>&, double)> u_exact;
  std::function<double(const std::array<double, 3>&, double)> v_exact;
  Forcing forcing;
  bool logistic_source = false;  // f = kappa s - mu s^2 from params, else f = 0
  double t_end = 0.1;
  double dt_factor = 0.25;  // dt = dt_factor * h^2 on each grid
};

/// Pure diffusion, u = 2 + cos(pi x) e^{-t} on [0,1] with chi = 0 and f = 0.
/// The constant offset keeps u positive and is reproduced exactly.
ManufacturedProblem diffusion_manufactured(double d1);

/// u = 1 + 0.5 cos(pi x) e^{-t}, v = 1 + 0.5 cos(pi x) e^{-t} with the
/// chemotactic flux and logistic source active.
ManufacturedProblem chemotaxis_manufactured(const Parameters& p);

struct RefinementResult {
  std::vector<int> cells;
  std::vector<double> errors;  // discrete L2 error of u at t_end
  std::vector<double> orders;  // log2 of consecutive error ratios
  double observed_order = 0.0;  // last entry of orders
};

/// Runs the problem on each grid and estimates the spatial order. Grids must
/// be 1D or more, share extents, and double the cell count at each level.
RefinementResult refinement_study(const ManufacturedProblem& problem,
                                  const std::vector<Grid>& grids);

}  // namespace kslab
