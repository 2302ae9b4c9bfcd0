#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/solver.hpp"

namespace kslab {

/// Process exit codes of a scenario run.
enum ExitCode : int {
  kExitPass = 0,
  kExitBlowup = 2,
  kExitConfig = 3,
  kExitAuditFail = 4,
};

struct ScenarioResult {
  int exit_code = kExitPass;
  std::optional<Outcome> outcome;  // absent when no simulation ran
  double sup_linf_u = 0.0;
  double mu0 = 0.0;
  bool mu_exceeds_mu0 = false;
  std::optional<DecayFit> linf_fit;  // fit of Linf_u over the default window
  std::vector<std::pair<std::string, std::string>> report;  // contents of report.txt
  std::string message;
};

/// Runs the configured scenario and writes report.txt, diagnostics.csv and
/// snapshots under cfg.output_dir. Never throws for bad input: config
/// problems map to exit code 3.
ScenarioResult run_scenario(const ExperimentConfig& cfg);

/// Threshold report as ordered key/value lines (mu0, mu0_branch, h, mu1,
/// gamma, epsilon0 and the applicability flags).
std::vector<std::pair<std::string, std::string>> describe(const ThresholdReport& t);

/// The initial state described by cfg.ic (loading custom fields from disk).
State build_initial_state(const ExperimentConfig& cfg);

}  // namespace kslab
