#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kslab/params.hpp"
#include "kslab/solver.hpp"

namespace kslab {

enum class ScenarioKind {
  Boundedness,
  ConvergencePositiveKappa,
  DecayZeroKappa,
  DecayNegativeKappa,
  ConvexComparison,
  SmallDiffusionSweep,
  ManufacturedOrder,
};

std::string to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& name);

struct ExperimentConfig {
  Parameters params;
  Grid grid = Grid::unit_box(1, 64);
  SolverConfig solver;
  InitialConditionSpec ic;     // u_base/v_base resolved at parse time
  std::string ic_u_file, ic_v_file;  // custom-field data (raw float64 snapshots)
  ScenarioKind scenario = ScenarioKind::Boundedness;
  bool convex = false;
  std::string output_dir = "kslab_out";
  std::uint64_t seed = 0;
  bool write_snapshots = true;
  std::string sweep_axis = "d1";
  std::vector<double> sweep_values;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the sectioned key = value format:
///
///   [params]   d1 d2 chi alpha beta kappa mu (required), a n (optional)
///   [grid]     dim cells (required), extents
///   [solver]   dt_initial dt_min t_end cfl_safety scheme blowup_linf_threshold
///              snapshot_stride strang store_states
///   [ic]       kind u_base v_base amplitude width center u_file v_file
///   [scenario] name (required), convex output_dir seed write_snapshots
///              sweep_axis sweep_values
///
/// Lists are comma separated. '#' starts a comment line. Unknown sections or
/// keys, duplicates, type mismatches and scenario constraint violations all
/// throw InputError with the line number and key.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

/// Writes every field explicitly; parse_config(serialize(c)) == c.
std::string serialize(const ExperimentConfig& cfg);

/// Scenario-specific constraints (e.g. kappa > 0 and mu > mu1 for
/// convergence-positive-kappa). Called by parse_config.
void check_scenario_constraints(const ExperimentConfig& cfg);

/// Sets a named Parameters field ("d1", "chi", ..., "n"). Throws on an
/// unknown name or a non-integer n.
void set_parameter(Parameters& p, const std::string& name, double value);

}  // namespace kslab
