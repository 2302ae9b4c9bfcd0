#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kslab/config.hpp"
#include "kslab/scenario.hpp"

namespace kslab {

struct SweepSpec {
  std::string axis;  // a Parameters field name
  std::vector<double> values;
  ExperimentConfig base;
};

struct SweepRow {
  double value = 0.0;
  int exit_code = 0;
  std::string outcome;  // solver outcome, or "config-error"
  double sup_linf_u = 0.0;  // +inf after a detected blow-up
  double mu0 = 0.0;
  bool mu_exceeds_mu0 = false;
  std::string fit_model;
  std::optional<double> fit_rate;
  std::string error;
  std::string directory;
};

/// Worker cap: KSLAB_WORKERS if set to a positive integer, else the
/// hardware concurrency.
unsigned sweep_workers();

/// Runs every point (in parallel up to `workers`) in its own directory
/// base.output_dir/point_NNN and writes base.output_dir/summary.csv with one
/// row per value in request order. Throws InputError for an empty value
/// list, an unknown axis, or an inadmissible value.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::optional<unsigned> workers = {});

}  // namespace kslab
